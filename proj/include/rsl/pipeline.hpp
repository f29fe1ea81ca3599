#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rsl/dataset.hpp"
#include "rsl/features.hpp"
#include "rsl/training.hpp"

namespace rsl {

// Everything between raw audio and a classifier input grid.
struct FeatureConfig {
  TFKind representation = TFKind::kCochleogram;
  FramePlan stft_plan{256, 128, WindowKind::kHann};
  MelConfig mel;
  CQTConfig cqt;
  CochleaConfig cochlea;
  std::size_t grid_rows = 64;
  std::size_t grid_cols = 144;
};

// Raw representation, rounded through f32 so cached and on-the-fly paths are
// bit-identical downstream.
TFMatrix extract_feature(const Waveform& w, const FeatureConfig& cfg);

// Normalized (log-compressed unless MFCC) and resized classifier input.
Tensor feature_to_grid(const TFMatrix& raw, const FeatureConfig& cfg);

std::string feature_filename(const RespiratoryCycle& cycle, TFKind kind);

// One Example per cycle. With a cache directory, existing .tfm files are
// loaded and missing ones are computed and written back.
std::vector<Example> build_examples(
    const Corpus& corpus, const FeatureConfig& cfg, Task task,
    const std::optional<std::filesystem::path>& cache_dir);

}  // namespace rsl
