#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "rsl/common.hpp"
#include "rsl/rng.hpp"
#include "rsl/signal.hpp"

using namespace rsl;

namespace {

Waveform sine(double freq_hz, std::uint32_t rate, double seconds, double amp = 1.0) {
  Waveform w;
  w.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate);
  }
  return w;
}

// Magnitude at one analysis frequency of a middle slice, normalised so a
// unit sine reads ~1.
double tone_amplitude(const Waveform& w, double freq_hz, std::size_t n) {
  const std::size_t start = (w.samples.size() - n) / 2;
  std::vector<double> slice(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                            w.samples.begin() + static_cast<std::ptrdiff_t>(start + n));
  auto spec = dft(slice);
  const std::size_t bin = static_cast<std::size_t>(
      std::llround(freq_hz * static_cast<double>(n) / w.sample_rate_hz));
  return 2.0 * std::abs(spec[bin]) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("dft of a zero frame is zero") {
  auto spec = dft(std::vector<double>(32, 0.0));
  for (const auto& v : spec) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("dft of a bin-aligned cosine concentrates at +-k") {
  std::vector<double> frame(64);
  for (std::size_t n = 0; n < 64; ++n) {
    frame[n] = std::cos(2.0 * M_PI * 4.0 * static_cast<double>(n) / 64.0);
  }
  auto spec = dft(frame);
  CHECK(std::abs(spec[4]) == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(std::abs(spec[60]) == doctest::Approx(32.0).epsilon(1e-12));
  for (std::size_t k = 0; k < 64; ++k) {
    if (k == 4 || k == 60) continue;
    CHECK(std::abs(spec[k]) < 1e-9);
  }
}

TEST_CASE("dft of a constant frame is a DC spike") {
  auto spec = dft(std::vector<double>(8, 1.0));
  CHECK(spec[0].real() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(spec[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(spec[k]) < 1e-12);
}

TEST_CASE("Parseval holds for random frames") {
  Rng rng(41);
  for (std::size_t trial = 0; trial < 8; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(rng.next_below(256));
    std::vector<double> frame(n);
    for (double& v : frame) v = rng.uniform(-1.0, 1.0);
    auto spec = dft(frame);
    double time_energy = 0.0;
    for (double v : frame) time_energy += v * v;
    double freq_energy = 0.0;
    for (const auto& v : spec) freq_energy += std::norm(v);
    freq_energy /= static_cast<double>(n);
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("idft inverts dft") {
  Rng rng(42);
  std::vector<double> frame(96);
  for (double& v : frame) v = rng.uniform(-1.0, 1.0);
  auto spec = dft(frame);
  auto back = idft(spec);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    CHECK(back[i].real() == doctest::Approx(frame[i]).epsilon(1e-9));
    CHECK(std::abs(back[i].imag()) < 1e-9);
  }
}

TEST_CASE("frame_signal counts and windows") {
  Waveform w;
  w.sample_rate_hz = 1000;
  w.samples.assign(100, 1.0);

  SUBCASE("len=100 N=20 J=10 gives 9 frames") {
    auto frames = frame_signal(w, FramePlan{20, 10, WindowKind::kRectangular});
    CHECK(frames.size() == 9);
  }
  SUBCASE("rectangular frames equal raw slices") {
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      w.samples[i] = static_cast<double>(i);
    }
    auto frames = frame_signal(w, FramePlan{16, 8, WindowKind::kRectangular});
    for (std::size_t m = 0; m < frames.size(); ++m) {
      for (std::size_t i = 0; i < 16; ++i) {
        CHECK(frames[m][i] == w.samples[m * 8 + i]);
      }
    }
  }
  SUBCASE("hann window on constant input reproduces the coefficients") {
    w.samples.assign(8, 1.0);
    auto frames = frame_signal(w, FramePlan{8, 8, WindowKind::kHann});
    REQUIRE(frames.size() == 1);
    for (std::size_t n = 0; n < 8; ++n) {
      double expected = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / 7.0));
      CHECK(frames[0][n] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("signal shorter than one frame is an error") {
    w.samples.assign(5, 0.0);
    CHECK_THROWS_AS(frame_signal(w, FramePlan{10, 5, WindowKind::kHann}), Error);
  }
}

TEST_CASE("frame count formula holds exhaustively for short signals") {
  for (std::size_t len = 1; len <= 64; ++len) {
    Waveform w;
    w.sample_rate_hz = 100;
    w.samples.assign(len, 0.0);
    for (std::size_t n = 1; n <= len; ++n) {
      for (std::size_t j = 1; j <= n; ++j) {
        auto frames = frame_signal(w, FramePlan{n, j, WindowKind::kRectangular});
        CHECK(frames.size() == (len - n) / j + 1);
      }
    }
  }
}

TEST_CASE("resample at the source rate is the identity") {
  Waveform w = sine(200.0, 8000, 0.25);
  Waveform out = resample(w, 8000);
  CHECK(out.samples == w.samples);
}

TEST_CASE("resample rejects a zero target rate") {
  CHECK_THROWS_AS(resample(sine(100.0, 8000, 0.1), 0), std::invalid_argument);
}

TEST_CASE("downsampling keeps an in-band tone at the same frequency and amplitude") {
  Waveform in = sine(500.0, 8000, 2.0);
  Waveform out = resample(in, 4000);
  CHECK(out.sample_rate_hz == 4000);
  // duration within one output sample
  CHECK(std::llabs(static_cast<long long>(out.samples.size()) - 8000) <= 1);

  double in_amp = tone_amplitude(in, 500.0, 4096);
  double out_amp = tone_amplitude(out, 500.0, 2048);
  CHECK(out_amp == doctest::Approx(in_amp).epsilon(0.01));

  // peak bin frequency unchanged
  const std::size_t n = 2048;
  std::vector<double> slice(out.samples.begin() + 512,
                            out.samples.begin() + 512 + static_cast<std::ptrdiff_t>(n));
  auto spec = dft(slice);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
  }
  CHECK(peak == static_cast<std::size_t>(std::llround(500.0 * n / 4000.0)));
}

TEST_CASE("out-of-band energy is attenuated by at least 40 dB") {
  Waveform in = sine(2500.0, 8000, 2.0);
  Waveform out = resample(in, 4000);
  // 2500 Hz at 8 kHz aliases to 1500 Hz after 2x decimation.
  double alias_amp = tone_amplitude(out, 1500.0, 2048);
  double in_amp = tone_amplitude(in, 2500.0, 4096);
  CHECK(20.0 * std::log10(alias_amp / in_amp) < -40.0);
}

TEST_CASE("resample is linear") {
  Rng rng(5);
  Waveform w;
  w.sample_rate_hz = 10000;
  w.samples.resize(3000);
  for (double& v : w.samples) v = rng.uniform(-1.0, 1.0);

  Waveform scaled = w;
  for (double& v : scaled.samples) v *= 0.37;

  Waveform a = resample(scaled, 4000);
  Waveform b = resample(w, 4000);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i] == doctest::Approx(0.37 * b.samples[i]).epsilon(1e-9));
  }
}
