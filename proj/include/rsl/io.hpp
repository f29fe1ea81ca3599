#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rsl/signal.hpp"

namespace rsl::io {

// RIFF/WAVE input, PCM16 little-endian or IEEE float32 only. Multichannel
// input is averaged to mono; 16-bit samples are scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };

// Mono writer used by fixtures and the synthetic-corpus helpers. PCM16
// clamps to [-32768, 32767] after scaling by 32768.
void write_wav(const std::filesystem::path& path, const Waveform& w,
               WavEncoding enc = WavEncoding::kPcm16);

// RGB8 image, row 0 at the top.
void write_png_rgb8(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& pixels, std::size_t width,
                    std::size_t height);

// Whole-file write via temp + rename so partial output never lands.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64 over raw bytes; used for run-manifest input hashes.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

}  // namespace rsl::io
