#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsl/signal.hpp"

namespace rsl {

enum class TFKind : std::uint8_t {
  kStft = 0,
  kMel = 1,
  kMfcc = 2,
  kCqt = 3,
  kCochleogram = 4,
};

const char* tf_kind_name(TFKind kind);
TFKind tf_kind_from_name(const std::string& name);

// K x L time-frequency grid, rows ordered by ascending centre frequency.
// MFCC rows are coefficient indices and may be negative; all other kinds are
// nonnegative magnitudes/energies.
struct TFMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;        // row-major rows x cols
  std::vector<double> freq_axis_hz;  // rows entries
  double frame_hop_s = 0.0;
  TFKind kind = TFKind::kStft;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct MelConfig {
  std::size_t n_filters = 64;
  std::size_t n_coeffs = 64;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;  // 0 -> sample_rate / 2
  FramePlan plan;
};

struct CQTConfig {
  double f1_hz = 100.0;
  std::size_t bins_per_octave = 12;
  std::size_t n_bins = 52;
  WindowKind window_kind = WindowKind::kHann;
  std::size_t hop_samples = 128;
};

struct CochleaConfig {
  std::size_t n_filters = 64;
  double fc_min_hz = 100.0;
  double fc_max_hz = 0.0;  // 0 -> sample_rate / 2
  std::size_t order = 4;
  double frame_len_s = 0.084;
  double hop_s = 0.042;
};

// ---- Spectral transforms -------------------------------------------------

// Magnitude spectrogram; K = N/2 + 1 bins, phase discarded.
TFMatrix stft(const Waveform& w, const FramePlan& plan);

// Mel(f) = 1127 * ln(1 + f / 700) and its inverse.
double mel_scale(double f_hz);
double mel_to_hz(double mel);

// M triangular filters, peaks at the M interior points of a uniform mel grid
// spanning [fmin, fmax]; weight 1 at the peak, 0 at the neighbouring centres.
// Rows are filters, columns are DFT bins (n_fft_bins = N/2 + 1).
std::vector<double> mel_filterbank(const MelConfig& cfg, std::size_t n_fft_bins,
                                   std::uint32_t sample_rate_hz);

TFMatrix mfcc(const Waveform& w, const MelConfig& cfg);

// The printed DCT: Y_n = sqrt(2/M) * sum_m S_m cos(pi n / M * (m + 1/2)).
std::vector<double> mfcc_dct(const std::vector<double>& log_energies,
                             std::size_t n_coeffs);

TFMatrix cqt(const Waveform& w, const CQTConfig& cfg);

// Geometric bin centres f_k = f1 * 2^(k/b), k = 0..n_bins-1; one octave up
// is exactly a doubling.
std::vector<double> cqt_frequencies(const CQTConfig& cfg);

// Time-frequency atom a_k(n) = (1/N_k) w(n/N_k) exp(-i 2 pi n f_k / fs) with
// the real-valued length N_k = Q fs / f_k.
std::vector<std::complex<double>> cqt_atom(const CQTConfig& cfg,
                                           std::uint32_t sample_rate_hz,
                                           std::size_t k);

// ---- Gammatone cochleogram -------------------------------------------------

// ERB(fc) = 24.7 * (4.37 * fc / 1000 + 1), bandwidth b(fc) = 1.019 * ERB(fc),
// and the ERB-number scale 21.4 * log10(1 + 0.00437 f) used for spacing.
double erb_bandwidth_hz(double fc_hz);
double gammatone_decay_hz(double fc_hz);
double erb_number(double f_hz);
double erb_number_to_hz(double erb_num);

// g(t) = t^(o-1) exp(-2 pi b(fc) t) cos(2 pi fc t), sampled and peak-normalised.
std::vector<double> gammatone_impulse_response(double fc_hz,
                                               const CochleaConfig& cfg,
                                               double duration_s,
                                               std::uint32_t sample_rate_hz);

// Centre frequencies: n_filters points uniformly spaced on the ERB-number
// scale strictly between fc_min and fc_max (interior points, like mel
// filterbank centres between edge frequencies).
std::vector<double> cochlea_center_frequencies(const CochleaConfig& cfg,
                                               std::uint32_t sample_rate_hz);

TFMatrix cochleogram(const Waveform& w, const CochleaConfig& cfg);

// ---- Post-processing -------------------------------------------------------

// log(1 + v / 1e-6) then min-max to [0, 1]; a constant matrix maps to zeros.
// Rejects MFCC input (already log-domain).
TFMatrix log_compress_normalize(const TFMatrix& tf);

// Min-max to [0, 1] only (the MFCC path).
TFMatrix minmax_normalize(const TFMatrix& tf);

// Align-corners bilinear resize of the value grid.
TFMatrix resize_to_grid(const TFMatrix& tf, std::size_t rows, std::size_t cols);

// Round every value through float32. Persisted features are f32, so both the
// cached and the on-the-fly classifier paths consume identical grids.
TFMatrix quantize_f32(const TFMatrix& tf);

// Normalized value -> Viridis RGB via the embedded 256-entry table with
// linear interpolation.
std::array<std::uint8_t, 3> viridis_rgb(double v);

// One pixel per cell, low frequencies at the bottom row. Input must already
// be normalized to [0, 1].
void render_viridis(const TFMatrix& tf, const std::filesystem::path& path);

// ---- Persistence -----------------------------------------------------------

// Flat binary container: magic "TFM1", u32 K, u32 L, f64 hop_s, kind byte,
// K*L little-endian f32 row-major values, K f32 centre frequencies.
void write_tfm(const TFMatrix& tf, const std::filesystem::path& path);
TFMatrix read_tfm(const std::filesystem::path& path);

}  // namespace rsl
