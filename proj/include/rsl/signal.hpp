#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace rsl {

// Mono audio with amplitudes nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 0;

  double duration_s() const {
    return sample_rate_hz == 0
               ? 0.0
               : static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class WindowKind { kHann, kRectangular, kBlackmanHarris };

struct FramePlan {
  std::size_t frame_len_samples = 256;
  std::size_t hop_samples = 128;
  WindowKind window_kind = WindowKind::kHann;
};

// Symmetric window of length n (denominator n-1; a length-1 window is {1}).
std::vector<double> make_window(WindowKind kind, std::size_t n);

// Continuous window shape on [0, 1], used for fractional-length atoms.
double window_at(WindowKind kind, double x);

// Direct-summation DFT, X(k) = sum_n x(n) exp(-j 2 pi k n / N). This is the
// oracle every faster spectral path is tested against.
std::vector<std::complex<double>> dft(const std::vector<double>& frame);
std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& frame);

// Inverse of dft; x(n) = (1/N) sum_k X(k) exp(+j 2 pi k n / N).
std::vector<std::complex<double>> idft(
    const std::vector<std::complex<double>>& spectrum);

// Windowed frames; frame m covers samples [m*hop, m*hop + N). Frames that
// would run past the end are dropped. Throws if the signal is shorter than
// one frame.
std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              const FramePlan& plan);

inline std::size_t frame_count(std::size_t len, std::size_t frame_len,
                               std::size_t hop) {
  return len < frame_len ? 0 : (len - frame_len) / hop + 1;
}

// Polyphase windowed-sinc resampler (Kaiser prototype, ~64 taps per output
// sample). Anti-alias cutoff 0.45 * min(source, target) Hz.
Waveform resample(const Waveform& w, std::uint32_t target_rate_hz);

}  // namespace rsl
