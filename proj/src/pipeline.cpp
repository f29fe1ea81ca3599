#include "rsl/pipeline.hpp"

#include <stdexcept>

#include "rsl/threading.hpp"

namespace rsl {

TFMatrix extract_feature(const Waveform& w, const FeatureConfig& cfg) {
  switch (cfg.representation) {
    case TFKind::kStft:
      return quantize_f32(stft(w, cfg.stft_plan));
    case TFKind::kMfcc:
      return quantize_f32(mfcc(w, cfg.mel));
    case TFKind::kCqt:
      return quantize_f32(cqt(w, cfg.cqt));
    case TFKind::kCochleogram:
      return quantize_f32(cochleogram(w, cfg.cochlea));
    case TFKind::kMel:
      break;
  }
  throw std::invalid_argument("extract_feature: mel spectrogram is not a pipeline representation");
}

Tensor feature_to_grid(const TFMatrix& raw, const FeatureConfig& cfg) {
  TFMatrix normalized =
      raw.kind == TFKind::kMfcc ? minmax_normalize(raw) : log_compress_normalize(raw);
  TFMatrix grid = resize_to_grid(normalized, cfg.grid_rows, cfg.grid_cols);
  return Tensor({grid.rows, grid.cols}, std::move(grid.values));
}

std::string feature_filename(const RespiratoryCycle& cycle, TFKind kind) {
  return cycle.recording_id + "_cyc" + std::to_string(cycle.cycle_index) + "." +
         tf_kind_name(kind) + ".tfm";
}

std::vector<Example> build_examples(
    const Corpus& corpus, const FeatureConfig& cfg, Task task,
    const std::optional<std::filesystem::path>& cache_dir) {
  if (cache_dir) std::filesystem::create_directories(*cache_dir);

  std::vector<Example> examples(corpus.cycles.size());
  parallel_for(corpus.cycles.size(), [&](std::size_t i) {
    const RespiratoryCycle& cycle = corpus.cycles[i];
    TFMatrix raw;
    bool cached = false;
    std::filesystem::path cache_path;
    if (cache_dir) {
      cache_path = *cache_dir / feature_filename(cycle, cfg.representation);
      if (std::filesystem::exists(cache_path)) {
        raw = read_tfm(cache_path);
        cached = true;
      }
    }
    if (!cached) {
      raw = extract_feature(cycle.audio, cfg);
      if (cache_dir) write_tfm(raw, cache_path);
    }
    Example& ex = examples[i];
    ex.grid = feature_to_grid(raw, cfg);
    ex.label = assign_label(cycle, task);
    ex.fold = corpus.folds.fold_of(cycle.patient_id);
    ex.patient_id = cycle.patient_id;
  });
  return examples;
}

}  // namespace rsl
