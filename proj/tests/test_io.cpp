#include <doctest.h>

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "rsl/common.hpp"
#include "rsl/features.hpp"
#include "rsl/io.hpp"

using namespace rsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "rsl_io_test";
  fs::create_directories(dir);
  return dir;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& data) {
  std::string s = "RIFF";
  put_u32(s, static_cast<std::uint32_t>(36 + data.size()));
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, format);
  put_u16(s, channels);
  put_u32(s, rate);
  put_u32(s, rate * channels * bits / 8);
  put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(s, bits);
  s += "data";
  put_u32(s, static_cast<std::uint32_t>(data.size()));
  s += data;
  return s;
}

}  // namespace

TEST_CASE("PCM16 samples are scaled by 1/32768") {
  std::string data;
  put_u16(data, 0);
  put_u16(data, 16384);
  put_u16(data, static_cast<std::uint16_t>(-32768));
  fs::path p = temp_dir() / "pcm16.wav";
  io::atomic_write(p, wav_bytes(1, 1, 8000, 16, data));

  Waveform w = io::read_wav(p);
  CHECK(w.sample_rate_hz == 8000);
  REQUIRE(w.samples.size() == 3);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[1] == 0.5);
  CHECK(w.samples[2] == -1.0);
}

TEST_CASE("a zero-length data chunk yields an empty waveform") {
  fs::path p = temp_dir() / "empty.wav";
  io::atomic_write(p, wav_bytes(1, 1, 8000, 16, ""));
  Waveform w = io::read_wav(p);
  CHECK(w.samples.empty());
  CHECK(w.sample_rate_hz == 8000);
}

TEST_CASE("stereo input is averaged to mono") {
  std::string data;
  // L = 1.0 (32767 ~= 0.99997), use float32 for exactness instead
  float left = 1.0f, right = 0.0f;
  for (int i = 0; i < 3; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &left, 4);
    put_u32(data, bits);
    std::memcpy(&bits, &right, 4);
    put_u32(data, bits);
  }
  fs::path p = temp_dir() / "stereo.wav";
  io::atomic_write(p, wav_bytes(3, 2, 4000, 32, data));
  Waveform w = io::read_wav(p);
  REQUIRE(w.samples.size() == 3);
  for (double v : w.samples) CHECK(v == 0.5);
}

TEST_CASE("malformed and unsupported WAV inputs raise typed errors") {
  fs::path bad = temp_dir() / "bad.wav";
  io::atomic_write(bad, "not a riff file at all");
  CHECK_THROWS_AS(io::read_wav(bad), FormatError);

  fs::path alaw = temp_dir() / "alaw.wav";
  io::atomic_write(alaw, wav_bytes(6, 1, 8000, 8, std::string(8, '\0')));
  CHECK_THROWS_AS(io::read_wav(alaw), UnsupportedEncodingError);

  fs::path pcm8 = temp_dir() / "pcm8.wav";
  io::atomic_write(pcm8, wav_bytes(1, 1, 8000, 8, std::string(8, '\0')));
  CHECK_THROWS_AS(io::read_wav(pcm8), UnsupportedEncodingError);
}

TEST_CASE("write_wav round-trips PCM16 and float32") {
  Waveform w;
  w.sample_rate_hz = 4000;
  w.samples = {0.0, 0.25, -0.5, 0.999};
  fs::path p16 = temp_dir() / "rt16.wav";
  io::write_wav(p16, w, io::WavEncoding::kPcm16);
  Waveform r16 = io::read_wav(p16);
  REQUIRE(r16.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(r16.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-4));
  }

  fs::path p32 = temp_dir() / "rt32.wav";
  io::write_wav(p32, w, io::WavEncoding::kFloat32);
  Waveform r32 = io::read_wav(p32);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(r32.samples[i] == static_cast<double>(static_cast<float>(w.samples[i])));
  }
}

TEST_CASE("PNG writer emits decodable truecolor scanlines") {
  std::vector<std::uint8_t> pixels = {255, 0, 0, 0, 255, 0, 0, 0, 255,
                                      10,  20, 30, 40, 50, 60, 70, 80, 90};
  fs::path p = temp_dir() / "tiny.png";
  io::write_png_rgb8(p, pixels, 3, 2);

  std::string bytes = io::read_file(p);
  REQUIRE(bytes.size() > 45);
  CHECK(std::memcmp(bytes.data() + 1, "PNG", 3) == 0);
  // IHDR width/height are big-endian at offsets 16 and 20.
  auto be32 = [&](std::size_t off) {
    return (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off])) << 24) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 3]));
  };
  CHECK(be32(16) == 3);
  CHECK(be32(20) == 2);

  // Locate IDAT, inflate, compare filtered scanlines.
  std::size_t idat = bytes.find("IDAT");
  REQUIRE(idat != std::string::npos);
  std::uint32_t idat_len = be32(idat - 4);
  std::vector<std::uint8_t> raw(2 * (1 + 3 * 3));
  uLongf raw_len = raw.size();
  REQUIRE(uncompress(raw.data(), &raw_len,
                     reinterpret_cast<const Bytef*>(bytes.data() + idat + 4),
                     idat_len) == Z_OK);
  REQUIRE(raw_len == raw.size());
  CHECK(raw[0] == 0);  // filter byte
  for (std::size_t i = 0; i < 9; ++i) CHECK(raw[1 + i] == pixels[i]);
  CHECK(raw[10] == 0);
  for (std::size_t i = 0; i < 9; ++i) CHECK(raw[11 + i] == pixels[9 + i]);
}

TEST_CASE("TFM1 container round-trips through f32") {
  TFMatrix tf;
  tf.rows = 3;
  tf.cols = 4;
  tf.kind = TFKind::kCqt;
  tf.frame_hop_s = 0.032;
  tf.values = {0.0, 1.5, 2.25, 3.0, 4.0, 5.5, 6.0, 7.75, 8.0, 9.0, 10.5, 11.0};
  tf.freq_axis_hz = {100.0, 200.0, 400.0};
  fs::path p = temp_dir() / "m.tfm";
  write_tfm(tf, p);
  TFMatrix back = read_tfm(p);
  CHECK(back.rows == 3);
  CHECK(back.cols == 4);
  CHECK(back.kind == TFKind::kCqt);
  CHECK(back.frame_hop_s == 0.032);
  CHECK(back.values == tf.values);  // all values f32-exact by construction
  CHECK(back.freq_axis_hz == tf.freq_axis_hz);

  io::atomic_write(p, "TFMX garbage");
  CHECK_THROWS_AS(read_tfm(p), FormatError);
}

TEST_CASE("fnv1a64 matches its published offset basis") {
  CHECK(io::fnv1a64("", 0) == 0xCBF29CE484222325ULL);
  CHECK(io::hex64(0xCBF29CE484222325ULL) == "cbf29ce484222325");
}
