#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numeric>
#include <vector>

#include "rsl/common.hpp"
#include "rsl/features.hpp"
#include "rsl/io.hpp"
#include "rsl/rng.hpp"
#include "rsl/signal.hpp"

using namespace rsl;
namespace fs = std::filesystem;

namespace {

Waveform tone(double freq_hz, std::uint32_t rate, double seconds, double amp = 0.5) {
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate);
  }
  return w;
}

Waveform random_wave(std::size_t n, std::uint32_t rate, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(n);
  for (double& v : w.samples) v = rng.uniform(-1.0, 1.0);
  return w;
}

// -3 dB width of a magnitude spectrum around its peak, with linear
// interpolation of the crossings.
double half_power_width_hz(const std::vector<double>& mag, double bin_hz) {
  std::size_t peak = 0;
  for (std::size_t i = 1; i < mag.size(); ++i) {
    if (mag[i] > mag[peak]) peak = i;
  }
  const double level = mag[peak] / std::sqrt(2.0);
  double left = 0.0, right = static_cast<double>(mag.size() - 1);
  for (std::size_t i = peak; i-- > 0;) {
    if (mag[i] < level) {
      left = static_cast<double>(i) + (level - mag[i]) / (mag[i + 1] - mag[i]);
      break;
    }
  }
  for (std::size_t i = peak + 1; i < mag.size(); ++i) {
    if (mag[i] < level) {
      right = static_cast<double>(i) - (level - mag[i]) / (mag[i - 1] - mag[i]);
      break;
    }
  }
  return (right - left) * bin_hz;
}

std::vector<double> padded_spectrum(const std::vector<std::complex<double>>& atom,
                                    std::size_t n_fft) {
  std::vector<std::complex<double>> padded(n_fft, {0.0, 0.0});
  std::copy(atom.begin(), atom.end(), padded.begin());
  auto spec = dft(padded);
  std::vector<double> mag(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) mag[i] = std::abs(spec[i]);
  return mag;
}

}  // namespace

TEST_CASE("mel scale pins its published points") {
  CHECK(mel_scale(0.0) == 0.0);
  CHECK(mel_scale(700.0) == doctest::Approx(1127.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(mel_scale(700.0) == doctest::Approx(781.17).epsilon(1e-4));
  CHECK(mel_scale(1000.0) == doctest::Approx(999.99).epsilon(1e-4));
  CHECK(mel_to_hz(mel_scale(437.0)) == doctest::Approx(437.0).epsilon(1e-12));
  CHECK_THROWS_AS(mel_scale(-1.0), std::invalid_argument);
}

TEST_CASE("mel filterbank geometry") {
  // fs 32 kHz, N = 512: bin 16 sits exactly at 1000 Hz. Choose edges so the
  // first filter peaks there.
  MelConfig cfg;
  cfg.n_filters = 2;
  cfg.n_coeffs = 2;
  cfg.fmin_hz = 0.0;
  cfg.fmax_hz = mel_to_hz(3.0 * mel_scale(1000.0));
  const std::size_t n_bins = 257;
  auto bank = mel_filterbank(cfg, n_bins, 32000);

  CHECK(bank[0 * n_bins + 16] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bank[1 * n_bins + 16] <= 1e-9);  // neighbour's centre = own left edge

  // centre frequencies are the interior uniform mel points
  const double delta = mel_scale(cfg.fmax_hz) / 3.0;
  const double c2 = mel_to_hz(2.0 * delta);
  // filter 1 peaks around c2: its largest weight bin brackets c2
  std::size_t argmax = 0;
  for (std::size_t k = 1; k < n_bins; ++k) {
    if (bank[1 * n_bins + k] > bank[1 * n_bins + argmax]) argmax = k;
  }
  const double bin_hz = 32000.0 / 512.0;
  CHECK(std::abs(static_cast<double>(argmax) * bin_hz - c2) <= bin_hz);

  for (std::size_t m = 0; m < 2; ++m) {
    double row_sum = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) row_sum += bank[m * n_bins + k];
    CHECK(row_sum > 0.0);
  }
}

TEST_CASE("mel filterbank rejects configs whose filters cover no bin") {
  MelConfig cfg;
  cfg.n_filters = 64;
  cfg.n_coeffs = 64;
  cfg.fmin_hz = 0.0;
  cfg.fmax_hz = 2000.0;
  CHECK_THROWS_AS(mel_filterbank(cfg, 9, 4000), Error);
}

TEST_CASE("the printed DCT matches its closed forms") {
  SUBCASE("unit impulse at m = 0, M = 8") {
    std::vector<double> s(8, 0.0);
    s[0] = 1.0;
    auto y = mfcc_dct(s, 8);
    for (std::size_t n = 0; n < 8; ++n) {
      CHECK(y[n] == doctest::Approx(std::sqrt(2.0 / 8.0) *
                                    std::cos(M_PI * static_cast<double>(n) / 16.0))
                        .epsilon(1e-12));
    }
  }
  SUBCASE("constant energies collapse onto coefficient 0") {
    const double c = 2.75;
    std::vector<double> s(16, c);
    auto y = mfcc_dct(s, 16);
    CHECK(y[0] == doctest::Approx(std::sqrt(2.0 / 16.0) * 16.0 * c).epsilon(1e-12));
    for (std::size_t n = 1; n < 16; ++n) CHECK(std::abs(y[n]) < 1e-9);
  }
}

TEST_CASE("mfcc of a zero signal is one repeated coefficient vector") {
  Waveform w;
  w.sample_rate_hz = 4000;
  w.samples.assign(2048, 0.0);
  MelConfig cfg;
  cfg.n_filters = 16;
  cfg.n_coeffs = 8;
  TFMatrix tf = mfcc(w, cfg);
  CHECK(tf.kind == TFKind::kMfcc);
  CHECK(tf.rows == 8);
  for (std::size_t r = 0; r < tf.rows; ++r) {
    for (std::size_t c = 1; c < tf.cols; ++c) {
      CHECK(tf.at(r, c) == tf.at(r, 0));
    }
  }
}

TEST_CASE("mfcc pipeline equals an independent direct implementation") {
  // Independent path: own window, dft() spectra, own triangle filterbank,
  // own log/DCT loops.
  Waveform w = random_wave(256 + 19 * 128, 4000, 99);
  MelConfig cfg;
  cfg.n_filters = 24;
  cfg.n_coeffs = 13;
  TFMatrix got = mfcc(w, cfg);
  REQUIRE(got.cols == 20);

  const std::size_t n = 256, hop = 128, n_bins = 129;
  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n - 1.0)));
  }
  // independent mel triangle construction
  const double mel_hi = 1127.0 * std::log(1.0 + 2000.0 / 700.0);
  auto to_hz = [](double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); };
  std::vector<double> edges(26);
  for (std::size_t i = 0; i < 26; ++i) edges[i] = to_hz(mel_hi * static_cast<double>(i) / 25.0);

  for (std::size_t m_frame = 0; m_frame < 20; ++m_frame) {
    std::vector<double> frame(n);
    for (std::size_t i = 0; i < n; ++i) frame[i] = w.samples[m_frame * hop + i] * window[i];
    auto spec = dft(frame);
    std::vector<double> s(24);
    for (std::size_t m = 0; m < 24; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) {
        const double f = static_cast<double>(k) * 4000.0 / 256.0;
        double weight = 0.0;
        if (f > edges[m] && f <= edges[m + 1]) {
          weight = (f - edges[m]) / (edges[m + 1] - edges[m]);
        } else if (f > edges[m + 1] && f < edges[m + 2]) {
          weight = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        }
        acc += std::norm(spec[k]) * weight;
      }
      s[m] = std::log(acc + 1e-10);
    }
    for (std::size_t coeff = 0; coeff < 13; ++coeff) {
      double acc = 0.0;
      for (std::size_t m = 0; m < 24; ++m) {
        acc += s[m] * std::cos(M_PI * static_cast<double>(coeff) / 24.0 *
                               (static_cast<double>(m) + 0.5));
      }
      const double expected = std::sqrt(2.0 / 24.0) * acc;
      CHECK(got.at(coeff, m_frame) ==
            doctest::Approx(expected).epsilon(1e-6).scale(std::max(1.0, std::abs(expected))));
    }
  }
}

TEST_CASE("cqt bin geometry is exactly geometric") {
  CQTConfig cfg;
  auto freqs = cqt_frequencies(cfg);
  CHECK(freqs[0] == 100.0);
  CHECK(freqs[12] == 200.0);
  for (std::size_t k = 0; k + cfg.bins_per_octave < freqs.size(); ++k) {
    CHECK(freqs[k + cfg.bins_per_octave] == 2.0 * freqs[k]);
  }
}

TEST_CASE("cqt concentrates a bin-centred tone on its bin") {
  CQTConfig cfg;
  auto freqs = cqt_frequencies(cfg);
  for (std::size_t k : {std::size_t{5}, std::size_t{25}, std::size_t{48}}) {
    Waveform w = tone(freqs[k], 4000, 1.0);
    TFMatrix tf = cqt(w, cfg);
    std::vector<double> energy(tf.rows, 0.0);
    for (std::size_t r = 0; r < tf.rows; ++r) {
      for (std::size_t c = 0; c < tf.cols; ++c) energy[r] += tf.at(r, c) * tf.at(r, c);
    }
    const std::size_t argmax =
        static_cast<std::size_t>(std::max_element(energy.begin(), energy.end()) - energy.begin());
    CHECK(argmax == k);
  }
}

TEST_CASE("cqt atoms share one Q factor within 1%") {
  CQTConfig cfg;
  auto freqs = cqt_frequencies(cfg);
  std::vector<double> qs;
  for (std::size_t k = 0; k < cfg.n_bins; ++k) {
    // conjugate so the mainlobe sits at +f_k; the width is conjugation-invariant
    auto atom = cqt_atom(cfg, 4000, k);
    for (auto& v : atom) v = std::conj(v);
    auto mag = padded_spectrum(atom, 32768);
    mag.resize(16384);
    const double width = half_power_width_hz(mag, 4000.0 / 32768.0);
    qs.push_back(freqs[k] / width);
  }
  const double mean_q = std::accumulate(qs.begin(), qs.end(), 0.0) / static_cast<double>(qs.size());
  for (double q : qs) {
    CHECK(std::abs(q - mean_q) / mean_q < 0.01);
  }
}

TEST_CASE("cqt rejects signals shorter than the longest atom") {
  CQTConfig cfg;
  Waveform w = tone(200.0, 4000, 0.05);  // 200 samples < N_1 ~ 673
  CHECK_THROWS_AS(cqt(w, cfg), Error);
}

TEST_CASE("gammatone impulse response basics") {
  CochleaConfig cfg;
  auto g = gammatone_impulse_response(1000.0, cfg, 0.064, 4000);
  CHECK(g[0] == 0.0);  // t^(o-1) kills t = 0 for o = 4
  double peak = 0.0;
  for (double v : g) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(erb_bandwidth_hz(1000.0) == doctest::Approx(132.639).epsilon(1e-6));
  CHECK(gammatone_decay_hz(1000.0) == doctest::Approx(135.159141).epsilon(1e-6));

  // envelope peak at (o-1)/(2 pi b)
  const double t_star = 3.0 / (2.0 * M_PI * gammatone_decay_hz(1000.0));
  CHECK(t_star == doctest::Approx(3.53e-3).epsilon(0.01));
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (std::abs(g[i]) > std::abs(g[argmax])) argmax = i;
  }
  CHECK(std::abs(static_cast<double>(argmax) / 4000.0 - t_star) < 0.75e-3);

  CHECK_THROWS_AS(gammatone_impulse_response(2000.0, cfg, 0.064, 4000),
                  std::invalid_argument);
  CHECK_THROWS_AS(gammatone_impulse_response(-5.0, cfg, 0.064, 4000),
                  std::invalid_argument);
}

TEST_CASE("cochlea centre frequencies are uniform on the ERB-number scale") {
  CochleaConfig cfg;
  auto fc = cochlea_center_frequencies(cfg, 4000);
  REQUIRE(fc.size() == 64);
  CHECK(fc.front() > 100.0);
  CHECK(fc.back() < 2000.0);
  const double step = erb_number(fc[1]) - erb_number(fc[0]);
  for (std::size_t k = 0; k + 1 < fc.size(); ++k) {
    CHECK(erb_number(fc[k + 1]) - erb_number(fc[k]) == doctest::Approx(step).epsilon(1e-9));
  }
}

TEST_CASE("cochleogram of silence is a zero matrix of the protocol shape") {
  Waveform w;
  w.sample_rate_hz = 4000;
  w.samples.assign(24000, 0.0);
  CochleaConfig cfg;
  TFMatrix tf = cochleogram(w, cfg);
  CHECK(tf.rows == 64);
  CHECK(tf.cols == 141);  // floor((24000 - 336) / 168) + 1
  for (double v : tf.values) CHECK(v == 0.0);
}

TEST_CASE("cochleogram routes a tone to the matching channel") {
  CochleaConfig cfg;
  auto centers = cochlea_center_frequencies(cfg, 4000);

  for (std::size_t j : {std::size_t{10}, std::size_t{32}, std::size_t{55}}) {
    Waveform w = tone(centers[j], 4000, 1.0);
    TFMatrix tf = cochleogram(w, cfg);
    std::vector<double> energy(tf.rows, 0.0);
    for (std::size_t r = 0; r < tf.rows; ++r) {
      for (std::size_t c = 0; c < tf.cols; ++c) energy[r] += tf.at(r, c) * tf.at(r, c);
    }
    const std::size_t argmax =
        static_cast<std::size_t>(std::max_element(energy.begin(), energy.end()) - energy.begin());
    CHECK(argmax == j);
  }
}

TEST_CASE("cochleogram matches a full convolution oracle") {
  CochleaConfig cfg;
  auto centers = cochlea_center_frequencies(cfg, 4000);
  Waveform w = tone(centers[32], 4000, 0.5);
  TFMatrix tf = cochleogram(w, cfg);

  const std::size_t frame_len = 336, hop = 168;
  const std::vector<double> window = make_window(WindowKind::kHann, frame_len);
  for (std::size_t j : {std::size_t{30}, std::size_t{32}, std::size_t{34}}) {
    auto ir = gammatone_impulse_response(centers[j], cfg, 0.128, 4000);
    std::vector<double> rectified(w.samples.size(), 0.0);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      double acc = 0.0;
      for (std::size_t tap = 0; tap < ir.size() && tap <= i; ++tap) {
        acc += ir[tap] * w.samples[i - tap];
      }
      rectified[i] = std::abs(acc);
    }
    for (std::size_t m = 0; m < tf.cols; ++m) {
      double expected = 0.0;
      for (std::size_t i = 0; i < frame_len; ++i) {
        expected += rectified[m * hop + i] * window[i];
      }
      CHECK(tf.at(j, m) ==
            doctest::Approx(expected).epsilon(0.01).scale(std::max(1e-9, expected)));
    }
  }
}

TEST_CASE("gammatone channel bandwidth grows with centre frequency") {
  CochleaConfig cfg;
  auto centers = cochlea_center_frequencies(cfg, 4000);
  double prev_width = 0.0;
  for (std::size_t j = 0; j < 64; j += 8) {
    auto ir = gammatone_impulse_response(centers[j], cfg, 0.128, 4000);
    std::vector<std::complex<double>> cplx(ir.begin(), ir.end());
    auto mag = padded_spectrum(cplx, 16384);
    mag.resize(8192);
    const double width = half_power_width_hz(mag, 4000.0 / 16384.0);
    CHECK(width >= prev_width);
    prev_width = width;
  }
}

TEST_CASE("log compression and normalization") {
  TFMatrix tf;
  tf.rows = 2;
  tf.cols = 3;
  tf.kind = TFKind::kStft;
  tf.freq_axis_hz = {0.0, 1.0};
  tf.values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};

  SUBCASE("all-zero stays all-zero") {
    tf.values.assign(6, 0.0);
    TFMatrix out = log_compress_normalize(tf);
    for (double v : out.values) CHECK(v == 0.0);
  }
  SUBCASE("range is [0,1] with max 1 and order preserved") {
    TFMatrix out = log_compress_normalize(tf);
    CHECK(*std::max_element(out.values.begin(), out.values.end()) == 1.0);
    CHECK(*std::min_element(out.values.begin(), out.values.end()) == 0.0);
    for (std::size_t i = 0; i + 1 < out.values.size(); ++i) {
      CHECK(out.values[i] <= out.values[i + 1]);
    }
  }
  SUBCASE("MFCC input is rejected") {
    tf.kind = TFKind::kMfcc;
    CHECK_THROWS_AS(log_compress_normalize(tf), std::invalid_argument);
    TFMatrix out = minmax_normalize(tf);
    CHECK(*std::max_element(out.values.begin(), out.values.end()) == 1.0);
  }
}

TEST_CASE("bilinear resize") {
  TFMatrix tf;
  tf.rows = 2;
  tf.cols = 2;
  tf.kind = TFKind::kStft;
  tf.freq_axis_hz = {0.0, 1.0};
  tf.values = {0.0, 1.0, 0.0, 1.0};

  SUBCASE("same size is the identity") {
    TFMatrix out = resize_to_grid(tf, 2, 2);
    CHECK(out.values == tf.values);
  }
  SUBCASE("constant input stays constant at any size") {
    tf.values.assign(4, 3.5);
    TFMatrix out = resize_to_grid(tf, 5, 7);
    for (double v : out.values) CHECK(v == doctest::Approx(3.5).epsilon(1e-12));
  }
  SUBCASE("2x2 to 2x3 interpolates the middle column") {
    TFMatrix out = resize_to_grid(tf, 2, 3);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.at(0, 2) == 1.0);
    CHECK(out.at(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("viridis lookup endpoints match the published table") {
  auto lo = viridis_rgb(0.0);
  CHECK(lo[0] == 68);
  CHECK(lo[1] == 1);
  CHECK(lo[2] == 84);
  auto hi = viridis_rgb(1.0);
  CHECK(hi[0] == 253);
  CHECK(hi[1] == 231);
  CHECK(hi[2] == 37);
}

TEST_CASE("render_viridis writes a one-pixel PNG for a 1x1 matrix") {
  TFMatrix tf;
  tf.rows = 1;
  tf.cols = 1;
  tf.kind = TFKind::kStft;
  tf.freq_axis_hz = {0.0};
  tf.values = {0.5};
  fs::path dir = fs::temp_directory_path() / "rsl_feat_test";
  fs::create_directories(dir);
  fs::path p = dir / "one.png";
  render_viridis(tf, p);
  std::string bytes = io::read_file(p);
  auto be32 = [&](std::size_t off) {
    return (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off])) << 24) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[off + 3]));
  };
  CHECK(be32(16) == 1);
  CHECK(be32(20) == 1);

  tf.values = {1.5};
  CHECK_THROWS_AS(render_viridis(tf, p), std::invalid_argument);
}

TEST_CASE("time shift by one hop shifts interior columns by one") {
  Waveform w = random_wave(6000, 4000, 1234);
  FramePlan plan{256, 128, WindowKind::kHann};
  TFMatrix a = stft(w, plan);

  Waveform shifted;
  shifted.sample_rate_hz = 4000;
  shifted.samples.assign(128, 0.0);
  shifted.samples.insert(shifted.samples.end(), w.samples.begin(), w.samples.end());
  TFMatrix b = stft(shifted, plan);

  for (std::size_t m = 0; m + 1 < a.cols; ++m) {
    for (std::size_t k = 0; k < a.rows; ++k) {
      CHECK(b.at(k, m + 1) ==
            doctest::Approx(a.at(k, m)).epsilon(1e-6).scale(std::max(1e-9, a.at(k, m))));
    }
  }

  CochleaConfig cfg;
  TFMatrix ca = cochleogram(w, cfg);
  Waveform cshift;
  cshift.sample_rate_hz = 4000;
  cshift.samples.assign(168, 0.0);
  cshift.samples.insert(cshift.samples.end(), w.samples.begin(), w.samples.end());
  TFMatrix cb = cochleogram(cshift, cfg);
  // skip the columns whose frames overlap the filter warm-up region
  for (std::size_t m = 4; m + 1 < ca.cols; ++m) {
    for (std::size_t k = 0; k < ca.rows; ++k) {
      CHECK(cb.at(k, m + 1) ==
            doctest::Approx(ca.at(k, m)).epsilon(1e-6).scale(std::max(1e-9, ca.at(k, m))));
    }
  }
}

TEST_CASE("spectral representations scale linearly in amplitude") {
  Waveform w = random_wave(4000, 4000, 77);
  Waveform scaled = w;
  for (double& v : scaled.samples) v *= 2.5;

  FramePlan plan{256, 128, WindowKind::kHann};
  TFMatrix sa = stft(w, plan), sb = stft(scaled, plan);
  for (std::size_t i = 0; i < sa.values.size(); ++i) {
    CHECK(sb.values[i] ==
          doctest::Approx(2.5 * sa.values[i]).epsilon(1e-9).scale(std::max(1e-12, sa.values[i])));
  }

  CochleaConfig ccfg;
  TFMatrix ca = cochleogram(w, ccfg), cb = cochleogram(scaled, ccfg);
  for (std::size_t i = 0; i < ca.values.size(); ++i) {
    CHECK(cb.values[i] ==
          doctest::Approx(2.5 * ca.values[i]).epsilon(1e-9).scale(std::max(1e-12, ca.values[i])));
  }
}

TEST_CASE("stft of silence is a zero matrix with N/2+1 rows") {
  Waveform w;
  w.sample_rate_hz = 4000;
  w.samples.assign(1024, 0.0);
  FramePlan plan{256, 128, WindowKind::kHann};
  TFMatrix tf = stft(w, plan);
  CHECK(tf.rows == 129);
  CHECK(tf.cols == 7);
  for (double v : tf.values) CHECK(v == 0.0);
}

TEST_CASE("stft matches the dft oracle frame by frame") {
  Waveform w = random_wave(1024, 4000, 4242);
  FramePlan plan{64, 32, WindowKind::kRectangular};
  TFMatrix tf = stft(w, plan);
  auto frames = frame_signal(w, plan);
  for (std::size_t m = 0; m < frames.size(); ++m) {
    auto spec = dft(frames[m]);
    for (std::size_t k = 0; k < tf.rows; ++k) {
      CHECK(tf.at(k, m) ==
            doctest::Approx(std::abs(spec[k]))
                .epsilon(1e-9)
                .scale(std::max(1e-12, std::abs(spec[k]))));
    }
  }
}

TEST_CASE("a bin-aligned sine peaks at its row in every frame") {
  // bin 4 of a 64-point rectangular frame at 4 kHz -> 250 Hz
  Waveform w = tone(250.0, 4000, 0.5, 1.0);
  FramePlan plan{64, 64, WindowKind::kRectangular};
  TFMatrix tf = stft(w, plan);
  for (std::size_t m = 0; m < tf.cols; ++m) {
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < tf.rows; ++k) {
      if (tf.at(k, m) > tf.at(argmax, m)) argmax = k;
    }
    CHECK(argmax == 4);
  }
}

TEST_CASE("hann-windowed constant signal leaks only near DC") {
  // Frozen from the dft oracle applied to the symmetric hann coefficients
  // (length 64): |W(0)| = 31.5, |W(1)| = 16.1195, |W(2)| = 0.17357,
  // |W(3)| = 0.064523, decreasing beyond.
  Waveform w;
  w.sample_rate_hz = 4000;
  w.samples.assign(512, 1.0);
  FramePlan plan{64, 32, WindowKind::kHann};
  TFMatrix tf = stft(w, plan);
  auto oracle = dft(make_window(WindowKind::kHann, 64));
  CHECK(std::abs(oracle[3]) == doctest::Approx(0.0645233).epsilon(1e-5));
  for (std::size_t m = 0; m < tf.cols; ++m) {
    CHECK(tf.at(0, m) == doctest::Approx(31.5).epsilon(1e-9));
    CHECK(tf.at(1, m) == doctest::Approx(16.1195).epsilon(1e-4));
    for (std::size_t k = 3; k < tf.rows; ++k) {
      CHECK(tf.at(k, m) == doctest::Approx(std::abs(oracle[k])).epsilon(1e-9));
      CHECK(tf.at(k, m) < 0.003 * tf.at(0, m));
    }
  }
}

TEST_CASE("quantize_f32 is idempotent and matches the persisted container") {
  Waveform w = random_wave(2048, 4000, 5150);
  TFMatrix raw = quantize_f32(stft(w, FramePlan{256, 128, WindowKind::kHann}));
  TFMatrix again = quantize_f32(raw);
  CHECK(raw.values == again.values);

  fs::path dir = fs::temp_directory_path() / "rsl_feat_test";
  fs::create_directories(dir);
  write_tfm(raw, dir / "q.tfm");
  TFMatrix back = read_tfm(dir / "q.tfm");
  CHECK(back.values == raw.values);
}
