#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsl/dataset.hpp"
#include "rsl/models.hpp"
#include "rsl/tensor.hpp"

namespace rsl {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 10;  // epochs without validation improvement
  std::uint64_t seed = 0;
  void validate() const;
};

struct AdamState {
  ParamGrads m;
  ParamGrads v;
};

// Standard Adam with bias correction; t is the 1-based step index.
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state,
               long t, const TrainConfig& cfg);

enum class ModelKind { kViT, kBaselineCnn };
const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::kViT;
  ViTConfig vit;
  BaselineCnnConfig cnn;
};

// Uniform face over the two architectures for the training loop.
class Classifier {
 public:
  explicit Classifier(ModelSpec spec);

  ModelParams init(std::uint64_t seed) const;
  Tensor logits(const Tensor& grid, const ModelParams& params) const;
  // Runs forward + backward for one example; adds parameter gradients into
  // grads and returns the loss.
  double loss_and_accumulate(const Tensor& grid, int label,
                             const ModelParams& params, ParamGrads& grads) const;
  double loss_only(const Tensor& grid, int label, const ModelParams& params) const;
  std::size_t n_classes() const;
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
};

struct Example {
  Tensor grid;
  int label = 0;
  std::size_t fold = 0;
  std::string patient_id;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParams params;  // weights from the best-validation epoch
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  std::size_t epochs_ran = 0;
};

// Seeded shuffle per epoch, fixed batch order, strict-improvement early
// stopping on validation loss. An empty validation set disables early
// stopping (the final epoch wins).
TrainResult train(const Classifier& model,
                  const std::vector<const Example*>& train_set,
                  const std::vector<const Example*>& val_set,
                  const TrainConfig& cfg);

// Square count grid indexed [truth][predicted].
struct ConfusionMatrix {
  std::size_t n_classes = 2;
  std::vector<std::size_t> counts;

  explicit ConfusionMatrix(std::size_t n = 2) : n_classes(n), counts(n * n, 0) {}
  std::size_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * n_classes + pred];
  }
  std::size_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * n_classes + pred];
  }
  std::size_t total() const;
  void merge(const ConfusionMatrix& other);

  struct Counts {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  };
  // Binary layout: class 1 is the positive (adventitious) class.
  Counts binary() const;
  Counts one_vs_rest(std::size_t c) const;
};

// Argmax prediction, ties broken toward the lower class index.
std::size_t argmax_class(const Tensor& logits);

ConfusionMatrix evaluate(const Classifier& model, const ModelParams& params,
                         const std::vector<const Example*>& test_set);

// Zero-denominator metrics stay unset rather than defaulting to 0.
struct MetricSet {
  std::optional<double> acc, sen, spe, prec, sco;
};

// Binary: the Acc/Sen/Prec/Spe/Sco definitions over TP/TN/FP/FN. Four-class:
// overall accuracy plus macro-averaged one-vs-rest Sen/Spe/Prec.
MetricSet compute_metrics(const ConfusionMatrix& cm);

struct FoldResult {
  std::size_t fold = 0;
  ConfusionMatrix cm;
  MetricSet metrics;
  std::size_t epochs_ran = 0;
};

struct CrossValResult {
  std::vector<FoldResult> folds;
  MetricSet mean;    // metric-wise mean over folds
  MetricSet pooled;  // metrics of the summed confusion matrix
};

// Fold i tests on fold i, validates on fold (i+1) mod k, trains on the rest.
CrossValResult cross_validate(const std::vector<Example>& examples, std::size_t k,
                              const Classifier& model, const TrainConfig& cfg);

// Results CSV: task, representation, model, fold, acc, sen, spe, prec, sco,
// epochs_ran; ten fold rows plus "mean" and "pooled" aggregate rows.
std::string results_csv(const CrossValResult& result, Task task,
                        const std::string& representation,
                        const std::string& model_name);

std::string format_metric(const std::optional<double>& v);

}  // namespace rsl
