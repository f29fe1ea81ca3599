#include "rsl/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rsl/common.hpp"

namespace rsl::io {

namespace {

std::uint32_t rd_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void wr_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

float rd_f32(const std::uint8_t* p) {
  std::uint32_t bits = rd_u32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

Waveform read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= size) {
    const char* id = reinterpret_cast<const char*>(p + off);
    std::uint32_t chunk_len = rd_u32(p + off + 4);
    std::size_t body = off + 8;
    if (body + chunk_len > size) throw FormatError(path.string() + ": truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw FormatError(path.string() + ": short fmt chunk");
      format = rd_u16(p + body);
      channels = rd_u16(p + body + 2);
      rate = rd_u32(p + body + 4);
      bits = rd_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + body;
      data_len = chunk_len;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || rate == 0 || channels == 0) {
    throw FormatError(path.string() + ": missing or malformed fmt chunk");
  }
  if (data == nullptr) throw FormatError(path.string() + ": missing data chunk");

  const bool pcm16 = (format == 1 && bits == 16);
  const bool float32 = (format == 3 && bits == 32);
  if (!pcm16 && !float32) {
    throw UnsupportedEncodingError(path.string() + ": only PCM16 and float32 are supported (format=" +
                                   std::to_string(format) + ", bits=" + std::to_string(bits) + ")");
  }

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = frame_bytes == 0 ? 0 : data_len / frame_bytes;

  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(n_frames);
  const double inv_channels = channels == 0 ? 0.0 : 1.0 / channels;
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const std::uint8_t* sp = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        std::int16_t s = static_cast<std::int16_t>(rd_u16(sp));
        acc += static_cast<double>(s) / 32768.0;
      } else {
        acc += static_cast<double>(rd_f32(sp));
      }
    }
    w.samples[i] = acc * inv_channels;
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w, WavEncoding enc) {
  const std::uint16_t channels = 1;
  const std::uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t format = enc == WavEncoding::kPcm16 ? 1 : 3;
  const std::uint32_t byte_rate = w.sample_rate_hz * channels * bits / 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * bits / 8);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  wr_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  wr_u32(out, 16);
  wr_u16(out, format);
  wr_u16(out, channels);
  wr_u32(out, w.sample_rate_hz);
  wr_u32(out, byte_rate);
  wr_u16(out, static_cast<std::uint16_t>(channels * bits / 8));
  wr_u16(out, bits);
  out += "data";
  wr_u32(out, data_len);
  for (double v : w.samples) {
    if (enc == WavEncoding::kPcm16) {
      long s = std::lround(v * 32768.0);
      s = std::clamp(s, -32768L, 32767L);
      wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    } else {
      float f = static_cast<float>(v);
      std::uint32_t bits32;
      std::memcpy(&bits32, &f, sizeof(f));
      wr_u32(out, bits32);
    }
  }
  atomic_write(path, out);
}

namespace {

void append_png_chunk(std::string& out, const char type[4], const std::string& body) {
  std::string be;
  std::uint32_t len = static_cast<std::uint32_t>(body.size());
  be.push_back(static_cast<char>((len >> 24) & 0xFF));
  be.push_back(static_cast<char>((len >> 16) & 0xFF));
  be.push_back(static_cast<char>((len >> 8) & 0xFF));
  be.push_back(static_cast<char>(len & 0xFF));
  out += be;
  std::string chunk(type, 4);
  chunk += body;
  out += chunk;
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0, reinterpret_cast<const Bytef*>(chunk.data()), static_cast<uInt>(chunk.size())));
  out.push_back(static_cast<char>((crc >> 24) & 0xFF));
  out.push_back(static_cast<char>((crc >> 16) & 0xFF));
  out.push_back(static_cast<char>((crc >> 8) & 0xFF));
  out.push_back(static_cast<char>(crc & 0xFF));
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& pixels, std::size_t width,
                    std::size_t height) {
  if (pixels.size() != width * height * 3) {
    throw std::invalid_argument("write_png_rgb8: pixel buffer size mismatch");
  }
  // Raw scanlines, filter byte 0 per row.
  std::string raw;
  raw.reserve(height * (1 + width * 3));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(pixels.data() + y * width * 3), width * 3);
  }
  uLongf comp_cap = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(comp_cap, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &comp_cap,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_BEST_SPEED) != Z_OK) {
    throw IoError("write_png_rgb8: deflate failed");
  }
  compressed.resize(comp_cap);

  std::string ihdr;
  auto push_be32 = [&ihdr](std::uint32_t v) {
    ihdr.push_back(static_cast<char>((v >> 24) & 0xFF));
    ihdr.push_back(static_cast<char>((v >> 16) & 0xFF));
    ihdr.push_back(static_cast<char>((v >> 8) & 0xFF));
    ihdr.push_back(static_cast<char>(v & 0xFF));
  };
  push_be32(static_cast<std::uint32_t>(width));
  push_be32(static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace

  std::string out("\x89PNG\r\n\x1a\n", 8);
  append_png_chunk(out, "IHDR", ihdr);
  append_png_chunk(out, "IDAT", compressed);
  append_png_chunk(out, "IEND", "");
  atomic_write(path, out);
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace rsl::io
