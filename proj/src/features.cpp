#include "rsl/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rsl/common.hpp"
#include "rsl/io.hpp"
#include "rsl/kernels.hpp"
#include "rsl/threading.hpp"
#include "rsl/viridis_table.hpp"

namespace rsl {

namespace {
constexpr double kLogEnergyFloor = 1e-10;  // inside the Eq-(4) style log
constexpr double kLogCompressRef = 1e-6;
constexpr double kGammatoneTailCut = 1e-5;
constexpr double kGammatoneMaxIrS = 0.128;
}  // namespace

const char* tf_kind_name(TFKind kind) {
  switch (kind) {
    case TFKind::kStft: return "stft";
    case TFKind::kMel: return "mel";
    case TFKind::kMfcc: return "mfcc";
    case TFKind::kCqt: return "cqt";
    case TFKind::kCochleogram: return "cochleogram";
  }
  return "unknown";
}

TFKind tf_kind_from_name(const std::string& name) {
  if (name == "stft") return TFKind::kStft;
  if (name == "mel") return TFKind::kMel;
  if (name == "mfcc") return TFKind::kMfcc;
  if (name == "cqt") return TFKind::kCqt;
  if (name == "cochleogram") return TFKind::kCochleogram;
  throw std::invalid_argument("unknown representation: " + name);
}

TFMatrix stft(const Waveform& w, const FramePlan& plan) {
  const auto frames = frame_signal(w, plan);
  const std::size_t n = plan.frame_len_samples;
  const std::size_t n_bins = n / 2 + 1;
  const std::size_t n_frames = frames.size();

  // Per-bin cos/sin rows so each bin is two contiguous dots.
  std::vector<double> cos_rows(n_bins * n), sin_rows(n_bins * n);
  for (std::size_t k = 0; k < n_bins; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double angle = 2.0 * M_PI * static_cast<double>((k * i) % n) / static_cast<double>(n);
      cos_rows[k * n + i] = std::cos(angle);
      sin_rows[k * n + i] = std::sin(angle);
    }
  }

  TFMatrix tf;
  tf.kind = TFKind::kStft;
  tf.rows = n_bins;
  tf.cols = n_frames;
  tf.frame_hop_s = static_cast<double>(plan.hop_samples) / w.sample_rate_hz;
  tf.values.assign(n_bins * n_frames, 0.0);
  tf.freq_axis_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    tf.freq_axis_hz[k] = static_cast<double>(k) * w.sample_rate_hz / static_cast<double>(n);
  }

  parallel_for(n_frames, [&](std::size_t m) {
    const double* frame = frames[m].data();
    for (std::size_t k = 0; k < n_bins; ++k) {
      double re = kernels::dot(frame, cos_rows.data() + k * n, n);
      double im = kernels::dot(frame, sin_rows.data() + k * n, n);
      tf.values[k * n_frames + m] = std::hypot(re, im);
    }
  });
  return tf;
}

double mel_scale(double f_hz) {
  if (f_hz < 0.0) throw std::invalid_argument("mel_scale: negative frequency");
  return 1127.0 * std::log1p(f_hz / 700.0);
}

double mel_to_hz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

std::vector<double> mel_filterbank(const MelConfig& cfg, std::size_t n_fft_bins,
                                   std::uint32_t sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  const double fmax = cfg.fmax_hz > 0.0 ? cfg.fmax_hz : nyquist;
  if (cfg.n_filters == 0 || cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_filters ||
      cfg.fmin_hz < 0.0 || cfg.fmin_hz >= fmax || fmax > nyquist + 1e-9) {
    throw std::invalid_argument("mel_filterbank: invalid config");
  }
  if (n_fft_bins < 2) throw std::invalid_argument("mel_filterbank: too few bins");

  const std::size_t m_filters = cfg.n_filters;
  const double mel_lo = mel_scale(cfg.fmin_hz);
  const double mel_hi = mel_scale(fmax);
  const double step = (mel_hi - mel_lo) / static_cast<double>(m_filters + 1);

  std::vector<double> edges_hz(m_filters + 2);
  for (std::size_t i = 0; i < m_filters + 2; ++i) {
    edges_hz[i] = mel_to_hz(mel_lo + step * static_cast<double>(i));
  }

  // DFT bin k sits at k * fs / N with N = 2 * (n_fft_bins - 1).
  const double bin_hz = static_cast<double>(sample_rate_hz) /
                        (2.0 * static_cast<double>(n_fft_bins - 1));

  std::vector<double> weights(m_filters * n_fft_bins, 0.0);
  for (std::size_t m = 0; m < m_filters; ++m) {
    const double left = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double right = edges_hz[m + 2];
    double row_sum = 0.0;
    for (std::size_t k = 0; k < n_fft_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (f > left && f < right) {
        v = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      } else if (f == center) {
        v = 1.0;
      }
      weights[m * n_fft_bins + k] = v;
      row_sum += v;
    }
    if (row_sum <= 0.0) {
      throw Error("mel_filterbank: degenerate filterbank, filter " + std::to_string(m) +
                  " covers no DFT bin (increase frame length or reduce filters)");
    }
  }
  return weights;
}

std::vector<double> mfcc_dct(const std::vector<double>& log_energies,
                             std::size_t n_coeffs) {
  const std::size_t m_filters = log_energies.size();
  if (m_filters == 0 || n_coeffs == 0 || n_coeffs > m_filters) {
    throw std::invalid_argument("mfcc_dct: invalid coefficient count");
  }
  const double scale = std::sqrt(2.0 / static_cast<double>(m_filters));
  std::vector<double> out(n_coeffs);
  for (std::size_t n = 0; n < n_coeffs; ++n) {
    double acc = 0.0;
    for (std::size_t m = 0; m < m_filters; ++m) {
      acc += log_energies[m] *
             std::cos(M_PI * static_cast<double>(n) / static_cast<double>(m_filters) *
                      (static_cast<double>(m) + 0.5));
    }
    out[n] = scale * acc;
  }
  return out;
}

TFMatrix mfcc(const Waveform& w, const MelConfig& cfg) {
  TFMatrix spec = stft(w, cfg.plan);
  const std::size_t n_bins = spec.rows;
  const std::size_t n_frames = spec.cols;
  const std::size_t m_filters = cfg.n_filters;

  const std::vector<double> bank = mel_filterbank(cfg, n_bins, w.sample_rate_hz);

  TFMatrix tf;
  tf.kind = TFKind::kMfcc;
  tf.rows = cfg.n_coeffs;
  tf.cols = n_frames;
  tf.frame_hop_s = spec.frame_hop_s;
  tf.values.assign(tf.rows * tf.cols, 0.0);
  tf.freq_axis_hz.resize(tf.rows);
  for (std::size_t i = 0; i < tf.rows; ++i) tf.freq_axis_hz[i] = static_cast<double>(i);

  parallel_for(n_frames, [&](std::size_t col) {
    std::vector<double> power(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      double v = spec.values[k * n_frames + col];
      power[k] = v * v;
    }
    std::vector<double> log_energy(m_filters);
    for (std::size_t m = 0; m < m_filters; ++m) {
      double e = kernels::dot(power.data(), bank.data() + m * n_bins, n_bins);
      log_energy[m] = std::log(e + kLogEnergyFloor);
    }
    const std::vector<double> coeffs = mfcc_dct(log_energy, cfg.n_coeffs);
    for (std::size_t n = 0; n < cfg.n_coeffs; ++n) {
      tf.values[n * n_frames + col] = coeffs[n];
    }
  });
  return tf;
}

std::vector<double> cqt_frequencies(const CQTConfig& cfg) {
  if (cfg.f1_hz <= 0.0 || cfg.bins_per_octave == 0 || cfg.n_bins == 0) {
    throw std::invalid_argument("cqt: invalid config");
  }
  std::vector<double> freqs(cfg.n_bins);
  for (std::size_t k = 0; k < cfg.n_bins; ++k) {
    // Split k into octave and residue so one octave up is an exact doubling.
    const std::size_t octave = k / cfg.bins_per_octave;
    const std::size_t rem = k % cfg.bins_per_octave;
    const double base = cfg.f1_hz * std::exp2(static_cast<double>(rem) /
                                              static_cast<double>(cfg.bins_per_octave));
    freqs[k] = std::ldexp(base, static_cast<int>(octave));
  }
  return freqs;
}

std::vector<std::complex<double>> cqt_atom(const CQTConfig& cfg,
                                           std::uint32_t sample_rate_hz,
                                           std::size_t k) {
  const std::vector<double> freqs = cqt_frequencies(cfg);
  if (k >= freqs.size()) throw std::invalid_argument("cqt_atom: bin out of range");
  const double fs = static_cast<double>(sample_rate_hz);
  const double q = 1.0 / (std::exp2(1.0 / static_cast<double>(cfg.bins_per_octave)) - 1.0);
  const double n_k = q * fs / freqs[k];
  const std::size_t taps = static_cast<std::size_t>(std::floor(n_k)) + 1;
  std::vector<std::complex<double>> atom(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const double win = window_at(cfg.window_kind, static_cast<double>(i) / n_k);
    const double phase = 2.0 * M_PI * static_cast<double>(i) * freqs[k] / fs;
    atom[i] = {win * std::cos(phase) / n_k, -win * std::sin(phase) / n_k};
  }
  return atom;
}

TFMatrix cqt(const Waveform& w, const CQTConfig& cfg) {
  const std::vector<double> freqs = cqt_frequencies(cfg);
  const double fs = static_cast<double>(w.sample_rate_hz);
  if (freqs.back() > fs / 2.0) {
    throw std::invalid_argument("cqt: top bin exceeds Nyquist");
  }
  if (cfg.hop_samples == 0) throw std::invalid_argument("cqt: zero hop");

  // Same Q for every bin: window lengths N_k = Q * fs / f_k, kept real-valued
  // inside the window argument so bandwidth scales smoothly with f_k.
  struct Atom {
    std::vector<double> re, im;
  };
  std::vector<Atom> atoms(cfg.n_bins);
  for (std::size_t k = 0; k < cfg.n_bins; ++k) {
    const std::vector<std::complex<double>> atom = cqt_atom(cfg, w.sample_rate_hz, k);
    atoms[k].re.resize(atom.size());
    atoms[k].im.resize(atom.size());
    for (std::size_t i = 0; i < atom.size(); ++i) {
      // conj(a_k) for the Eq-(6) correlation
      atoms[k].re[i] = atom[i].real();
      atoms[k].im[i] = -atom[i].imag();
    }
  }
  if (atoms[0].re.size() > w.samples.size()) {
    throw Error("cqt: longest atom (" + std::to_string(atoms[0].re.size()) +
                " samples) exceeds the signal");
  }

  const std::size_t len = w.samples.size();
  const std::size_t n_frames = (len - 1) / cfg.hop_samples + 1;

  TFMatrix tf;
  tf.kind = TFKind::kCqt;
  tf.rows = cfg.n_bins;
  tf.cols = n_frames;
  tf.frame_hop_s = static_cast<double>(cfg.hop_samples) / fs;
  tf.freq_axis_hz = freqs;
  tf.values.assign(tf.rows * tf.cols, 0.0);

  parallel_for(cfg.n_bins, [&](std::size_t k) {
    const Atom& atom = atoms[k];
    const std::size_t taps = atom.re.size();
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
    for (std::size_t m = 0; m < n_frames; ++m) {
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(m * cfg.hop_samples);
      std::ptrdiff_t start = center - half;
      std::size_t a0 = 0;
      std::size_t count = taps;
      if (start < 0) {
        a0 = static_cast<std::size_t>(-start);
        count -= a0;
        start = 0;
      }
      if (static_cast<std::size_t>(start) + count > len) {
        count = len - static_cast<std::size_t>(start);
      }
      const double* x = w.samples.data() + start;
      double re = kernels::dot(x, atom.re.data() + a0, count);
      double im = kernels::dot(x, atom.im.data() + a0, count);
      tf.values[k * n_frames + m] = std::hypot(re, im);
    }
  });
  return tf;
}

double erb_bandwidth_hz(double fc_hz) {
  return 24.7 * (4.37 * fc_hz / 1000.0 + 1.0);
}

double gammatone_decay_hz(double fc_hz) { return 1.019 * erb_bandwidth_hz(fc_hz); }

double erb_number(double f_hz) { return 21.4 * std::log10(1.0 + 0.00437 * f_hz); }

double erb_number_to_hz(double erb_num) {
  return (std::pow(10.0, erb_num / 21.4) - 1.0) / 0.00437;
}

std::vector<double> gammatone_impulse_response(double fc_hz,
                                               const CochleaConfig& cfg,
                                               double duration_s,
                                               std::uint32_t sample_rate_hz) {
  if (fc_hz <= 0.0 || duration_s <= 0.0 || cfg.order < 1) {
    throw std::invalid_argument("gammatone_impulse_response: invalid argument");
  }
  if (fc_hz >= sample_rate_hz / 2.0) {
    throw std::invalid_argument("gammatone_impulse_response: fc at or above Nyquist");
  }
  const double fs = static_cast<double>(sample_rate_hz);
  const double b = gammatone_decay_hz(fc_hz);
  const std::size_t n = static_cast<std::size_t>(std::floor(duration_s * fs));
  std::vector<double> g(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / fs;
    double v = std::pow(t, static_cast<double>(cfg.order - 1)) *
               std::exp(-2.0 * M_PI * b * t) * std::cos(2.0 * M_PI * fc_hz * t);
    g[i] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 0.0) {
    for (double& v : g) v /= peak;
  }
  return g;
}

std::vector<double> cochlea_center_frequencies(const CochleaConfig& cfg,
                                               std::uint32_t sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  const double fc_max = cfg.fc_max_hz > 0.0 ? cfg.fc_max_hz : nyquist;
  if (cfg.n_filters == 0 || cfg.fc_min_hz <= 0.0 || cfg.fc_min_hz >= fc_max ||
      fc_max > nyquist + 1e-9) {
    throw std::invalid_argument("cochleogram: invalid config");
  }
  const double e_lo = erb_number(cfg.fc_min_hz);
  const double e_hi = erb_number(fc_max);
  const double step = (e_hi - e_lo) / static_cast<double>(cfg.n_filters + 1);
  std::vector<double> fc(cfg.n_filters);
  for (std::size_t k = 0; k < cfg.n_filters; ++k) {
    fc[k] = erb_number_to_hz(e_lo + step * static_cast<double>(k + 1));
  }
  return fc;
}

namespace {

// Truncation point: 128 ms, or where the gamma envelope falls below 1e-5 of
// its peak, whichever comes first.
std::size_t gammatone_ir_length(double fc_hz, std::size_t order, double fs) {
  const double b = gammatone_decay_hz(fc_hz);
  const std::size_t max_len = static_cast<std::size_t>(std::floor(kGammatoneMaxIrS * fs));
  const double o = static_cast<double>(order);
  auto envelope = [&](double t) {
    return std::pow(t, o - 1.0) * std::exp(-2.0 * M_PI * b * t);
  };
  const double t_peak = order > 1 ? (o - 1.0) / (2.0 * M_PI * b) : 0.0;
  const double env_peak = order > 1 ? envelope(t_peak) : 1.0;
  for (std::size_t i = 1; i < max_len; ++i) {
    double t = static_cast<double>(i) / fs;
    if (t > t_peak && envelope(t) < kGammatoneTailCut * env_peak) {
      return i + 1;
    }
  }
  return max_len;
}

}  // namespace

TFMatrix cochleogram(const Waveform& w, const CochleaConfig& cfg) {
  const std::vector<double> centers = cochlea_center_frequencies(cfg, w.sample_rate_hz);
  const double fs = static_cast<double>(w.sample_rate_hz);
  const std::size_t frame_len = static_cast<std::size_t>(std::lround(cfg.frame_len_s * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.hop_s * fs));
  if (frame_len == 0 || hop == 0 || hop > frame_len) {
    throw std::invalid_argument("cochleogram: invalid framing");
  }
  if (w.samples.size() < frame_len) {
    throw Error("cochleogram: signal shorter than one frame");
  }

  const std::size_t len = w.samples.size();
  const std::size_t n_frames = frame_count(len, frame_len, hop);
  const std::vector<double> window = make_window(WindowKind::kHann, frame_len);

  TFMatrix tf;
  tf.kind = TFKind::kCochleogram;
  tf.rows = cfg.n_filters;
  tf.cols = n_frames;
  tf.frame_hop_s = static_cast<double>(hop) / fs;
  tf.freq_axis_hz = centers;
  tf.values.assign(tf.rows * tf.cols, 0.0);

  parallel_for(cfg.n_filters, [&](std::size_t k) {
    const double ir_s = static_cast<double>(gammatone_ir_length(centers[k], cfg.order, fs)) / fs;
    std::vector<double> ir = gammatone_impulse_response(centers[k], cfg, ir_s, w.sample_rate_hz);
    std::reverse(ir.begin(), ir.end());
    const std::size_t taps = ir.size();

    // Rectified filter output |x * g|, then windowed sums per frame.
    std::vector<double> rectified(len);
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t count = std::min(taps, i + 1);
      const double* x = w.samples.data() + i + 1 - count;
      const double* h = ir.data() + taps - count;
      rectified[i] = std::abs(kernels::dot(x, h, count));
    }
    for (std::size_t m = 0; m < n_frames; ++m) {
      tf.values[k * n_frames + m] =
          kernels::dot(rectified.data() + m * hop, window.data(), frame_len);
    }
  });
  return tf;
}

TFMatrix log_compress_normalize(const TFMatrix& tf) {
  if (tf.kind == TFKind::kMfcc) {
    throw std::invalid_argument("log_compress_normalize: MFCC is already log-domain");
  }
  TFMatrix out = tf;
  for (double& v : out.values) v = std::log1p(v / kLogCompressRef);
  return minmax_normalize(out);
}

TFMatrix minmax_normalize(const TFMatrix& tf) {
  TFMatrix out = tf;
  if (out.values.empty()) return out;
  auto [lo_it, hi_it] = std::minmax_element(out.values.begin(), out.values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  const double inv = 1.0 / (hi - lo);
  for (double& v : out.values) v = (v - lo) * inv;
  return out;
}

namespace {

double lerp_axis(const std::vector<double>& axis, double pos) {
  if (axis.empty()) return 0.0;
  std::size_t i0 = static_cast<std::size_t>(std::floor(pos));
  if (i0 + 1 >= axis.size()) return axis.back();
  double frac = pos - static_cast<double>(i0);
  return axis[i0] + frac * (axis[i0 + 1] - axis[i0]);
}

}  // namespace

TFMatrix resize_to_grid(const TFMatrix& tf, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("resize_to_grid: empty target");
  if (tf.rows == 0 || tf.cols == 0) throw std::invalid_argument("resize_to_grid: empty source");
  if (rows == tf.rows && cols == tf.cols) return tf;

  TFMatrix out;
  out.kind = tf.kind;
  out.rows = rows;
  out.cols = cols;
  out.values.assign(rows * cols, 0.0);
  out.freq_axis_hz.resize(rows);

  const double row_scale = rows > 1 ? static_cast<double>(tf.rows - 1) / static_cast<double>(rows - 1) : 0.0;
  const double col_scale = cols > 1 ? static_cast<double>(tf.cols - 1) / static_cast<double>(cols - 1) : 0.0;
  out.frame_hop_s = tf.frame_hop_s * (cols > 1 ? col_scale : 1.0);

  for (std::size_t r = 0; r < rows; ++r) {
    const double src_r = static_cast<double>(r) * row_scale;
    out.freq_axis_hz[r] = lerp_axis(tf.freq_axis_hz, src_r);
    const std::size_t r0 = std::min(tf.rows - 1, static_cast<std::size_t>(std::floor(src_r)));
    const std::size_t r1 = std::min(tf.rows - 1, r0 + 1);
    const double fr = src_r - static_cast<double>(r0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double src_c = static_cast<double>(c) * col_scale;
      const std::size_t c0 = std::min(tf.cols - 1, static_cast<std::size_t>(std::floor(src_c)));
      const std::size_t c1 = std::min(tf.cols - 1, c0 + 1);
      const double fc = src_c - static_cast<double>(c0);
      const double top = tf.at(r0, c0) * (1.0 - fc) + tf.at(r0, c1) * fc;
      const double bot = tf.at(r1, c0) * (1.0 - fc) + tf.at(r1, c1) * fc;
      out.at(r, c) = top * (1.0 - fr) + bot * fr;
    }
  }
  return out;
}

TFMatrix quantize_f32(const TFMatrix& tf) {
  TFMatrix out = tf;
  for (double& v : out.values) v = static_cast<double>(static_cast<float>(v));
  for (double& v : out.freq_axis_hz) v = static_cast<double>(static_cast<float>(v));
  return out;
}

std::array<std::uint8_t, 3> viridis_rgb(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const double x = v * 255.0;
  const std::size_t i0 = std::min<std::size_t>(254, static_cast<std::size_t>(std::floor(x)));
  const double frac = x - static_cast<double>(i0);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) {
    double a = static_cast<double>(kViridisTable[i0][c]);
    double b = static_cast<double>(kViridisTable[i0 + 1][c]);
    rgb[c] = static_cast<std::uint8_t>(std::lround(a + frac * (b - a)));
  }
  return rgb;
}

void render_viridis(const TFMatrix& tf, const std::filesystem::path& path) {
  if (tf.rows == 0 || tf.cols == 0) throw std::invalid_argument("render_viridis: empty matrix");
  for (double v : tf.values) {
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
      throw std::invalid_argument("render_viridis: matrix not normalized to [0, 1]");
    }
  }
  std::vector<std::uint8_t> pixels(tf.rows * tf.cols * 3);
  for (std::size_t r = 0; r < tf.rows; ++r) {
    const std::size_t img_row = tf.rows - 1 - r;  // low frequencies at the bottom
    for (std::size_t c = 0; c < tf.cols; ++c) {
      auto rgb = viridis_rgb(tf.at(r, c));
      std::uint8_t* px = pixels.data() + (img_row * tf.cols + c) * 3;
      px[0] = rgb[0];
      px[1] = rgb[1];
      px[2] = rgb[2];
    }
  }
  io::write_png_rgb8(path, pixels, tf.cols, tf.rows);
}

namespace {

void wr_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void wr_f32le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(f));
  wr_u32le(out, bits);
}

void wr_f64le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(d));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t rd_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_tfm(const TFMatrix& tf, const std::filesystem::path& path) {
  std::string out;
  out.reserve(21 + 4 * (tf.values.size() + tf.rows));
  out += "TFM1";
  wr_u32le(out, static_cast<std::uint32_t>(tf.rows));
  wr_u32le(out, static_cast<std::uint32_t>(tf.cols));
  wr_f64le(out, tf.frame_hop_s);
  out.push_back(static_cast<char>(tf.kind));
  for (double v : tf.values) wr_f32le(out, static_cast<float>(v));
  for (double v : tf.freq_axis_hz) wr_f32le(out, static_cast<float>(v));
  io::atomic_write(path, out);
}

TFMatrix read_tfm(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  if (bytes.size() < 21 || std::memcmp(p, "TFM1", 4) != 0) {
    throw FormatError(path.string() + ": not a TFM1 container");
  }
  TFMatrix tf;
  tf.rows = rd_u32le(p + 4);
  tf.cols = rd_u32le(p + 8);
  std::uint64_t hop_bits = 0;
  for (int i = 7; i >= 0; --i) hop_bits = (hop_bits << 8) | p[12 + i];
  std::memcpy(&tf.frame_hop_s, &hop_bits, sizeof(double));
  const std::uint8_t kind = p[20];
  if (kind > 4) throw FormatError(path.string() + ": unknown TF kind byte");
  tf.kind = static_cast<TFKind>(kind);

  const std::size_t need = 21 + 4 * (tf.rows * tf.cols + tf.rows);
  if (bytes.size() < need) throw FormatError(path.string() + ": truncated TFM1 payload");

  tf.values.resize(tf.rows * tf.cols);
  const std::uint8_t* q = p + 21;
  for (double& v : tf.values) {
    float f;
    std::uint32_t bits = rd_u32le(q);
    std::memcpy(&f, &bits, sizeof(f));
    v = static_cast<double>(f);
    q += 4;
  }
  tf.freq_axis_hz.resize(tf.rows);
  for (double& v : tf.freq_axis_hz) {
    float f;
    std::uint32_t bits = rd_u32le(q);
    std::memcpy(&f, &bits, sizeof(f));
    v = static_cast<double>(f);
    q += 4;
  }
  return tf;
}

}  // namespace rsl
