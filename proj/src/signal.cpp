#include "rsl/signal.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rsl/common.hpp"
#include "rsl/kernels.hpp"

namespace rsl {

double window_at(WindowKind kind, double x) {
  switch (kind) {
    case WindowKind::kRectangular:
      return 1.0;
    case WindowKind::kHann:
      return 0.5 * (1.0 - std::cos(2.0 * M_PI * x));
    case WindowKind::kBlackmanHarris:
      return 0.35875 - 0.48829 * std::cos(2.0 * M_PI * x) +
             0.14128 * std::cos(4.0 * M_PI * x) -
             0.01168 * std::cos(6.0 * M_PI * x);
  }
  return 1.0;
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n <= 1 || kind == WindowKind::kRectangular) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = window_at(kind, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& frame) {
  const std::size_t n = frame.size();
  if (n == 0) throw std::invalid_argument("dft: empty frame");
  // One twiddle per residue keeps k*n products exact.
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t r = 0; r < n; ++r) {
    double angle = -2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
    twiddle[r] = {std::cos(angle), std::sin(angle)};
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      acc += frame[i] * twiddle[(k * i) % n];
    }
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> dft(const std::vector<double>& frame) {
  std::vector<std::complex<double>> cplx(frame.begin(), frame.end());
  return dft(cplx);
}

std::vector<std::complex<double>> idft(
    const std::vector<std::complex<double>>& spectrum) {
  const std::size_t n = spectrum.size();
  if (n == 0) throw std::invalid_argument("idft: empty spectrum");
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t r = 0; r < n; ++r) {
    double angle = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
    twiddle[r] = {std::cos(angle), std::sin(angle)};
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      acc += spectrum[k] * twiddle[(k * i) % n];
    }
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              const FramePlan& plan) {
  if (plan.frame_len_samples == 0 || plan.hop_samples == 0 ||
      plan.hop_samples > plan.frame_len_samples) {
    throw std::invalid_argument("frame_signal: invalid frame plan");
  }
  if (w.samples.size() < plan.frame_len_samples) {
    throw Error("frame_signal: signal shorter than one frame");
  }
  const std::size_t n = plan.frame_len_samples;
  const std::size_t count = frame_count(w.samples.size(), n, plan.hop_samples);
  const std::vector<double> window = make_window(plan.window_kind, n);
  std::vector<std::vector<double>> frames(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double* src = w.samples.data() + m * plan.hop_samples;
    std::vector<double>& frame = frames[m];
    frame.resize(n);
    for (std::size_t i = 0; i < n; ++i) frame[i] = src[i] * window[i];
  }
  return frames;
}

namespace {

double bessel_i0(double x) {
  double term = 1.0;
  double sum = 1.0;
  double half_x = 0.5 * x;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

Waveform resample(const Waveform& w, std::uint32_t target_rate_hz) {
  if (target_rate_hz == 0) {
    throw std::invalid_argument("resample: target rate must be positive");
  }
  if (w.sample_rate_hz == 0) {
    throw std::invalid_argument("resample: source rate must be positive");
  }
  if (target_rate_hz == w.sample_rate_hz) return w;

  const std::uint64_t g = std::gcd<std::uint64_t>(w.sample_rate_hz, target_rate_hz);
  const std::uint64_t up = target_rate_hz / g;
  const std::uint64_t down = w.sample_rate_hz / g;

  // Odd-length prototype with an integer group delay of 32 input samples.
  const std::uint64_t taps = 64 * up + 1;
  const std::int64_t center = static_cast<std::int64_t>(32 * up);
  const double fs_up = static_cast<double>(w.sample_rate_hz) * static_cast<double>(up);
  const double cutoff_hz =
      0.45 * static_cast<double>(std::min<std::uint32_t>(w.sample_rate_hz, target_rate_hz));
  const double fc = cutoff_hz / fs_up;  // cycles per upsampled sample
  const double beta = 0.1102 * (80.0 - 8.7);
  const double i0_beta = bessel_i0(beta);

  std::vector<double> proto(taps);
  const double half = static_cast<double>(taps - 1) / 2.0;
  for (std::uint64_t i = 0; i < taps; ++i) {
    double t = static_cast<double>(i) - half;
    double win_arg = t / half;
    double kaiser = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - win_arg * win_arg))) / i0_beta;
    proto[i] = 2.0 * fc * static_cast<double>(up) * sinc(2.0 * fc * t) * kaiser;
  }

  const std::int64_t in_len = static_cast<std::int64_t>(w.samples.size());
  const std::size_t out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(w.samples.size()) * static_cast<double>(target_rate_hz) /
      static_cast<double>(w.sample_rate_hz)));

  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len, 0.0);

  for (std::size_t t = 0; t < out_len; ++t) {
    // Output sample t sits at position u on the rate-L grid; input sample j
    // contributes through tap h[center + u - j*L].
    const std::int64_t u = static_cast<std::int64_t>(t) * static_cast<std::int64_t>(down);
    std::int64_t j_hi = (u + center) / static_cast<std::int64_t>(up);
    std::int64_t j_lo =
        (u + center - static_cast<std::int64_t>(taps - 1) + static_cast<std::int64_t>(up) - 1) /
        static_cast<std::int64_t>(up);
    if (j_lo < 0) j_lo = 0;
    if (j_hi >= in_len) j_hi = in_len - 1;
    double acc = 0.0;
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      acc += w.samples[static_cast<std::size_t>(j)] *
             proto[static_cast<std::size_t>(center + u - j * static_cast<std::int64_t>(up))];
    }
    out.samples[t] = acc;
  }
  return out;
}

}  // namespace rsl
