#include "rsl/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "rsl/common.hpp"
#include "rsl/kernels.hpp"
#include "rsl/rng.hpp"
#include "rsl/threading.hpp"

namespace rsl {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || learning_rate <= 0.0 || beta1 <= 0.0 ||
      beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0 || epsilon <= 0.0 || patience == 0) {
    throw std::invalid_argument("TrainConfig: all fields must be positive");
  }
  if (patience > epochs) {
    throw std::invalid_argument("TrainConfig: patience exceeds epoch budget");
  }
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state,
               long t, const TrainConfig& cfg) {
  if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (const std::string& name : params.names()) {
    Tensor& theta = params.at(name);
    const Tensor& g = grads.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      theta.data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::kViT ? "vit" : "baseline-cnn";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "vit") return ModelKind::kViT;
  if (name == "baseline-cnn") return ModelKind::kBaselineCnn;
  throw std::invalid_argument("unknown model: " + name);
}

Classifier::Classifier(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind == ModelKind::kViT) {
    spec_.vit.validate();
  } else {
    spec_.cnn.validate();
  }
}

ModelParams Classifier::init(std::uint64_t seed) const {
  return spec_.kind == ModelKind::kViT ? vit_init_params(spec_.vit, seed)
                                       : cnn_init_params(spec_.cnn, seed);
}

Tensor Classifier::logits(const Tensor& grid, const ModelParams& params) const {
  return spec_.kind == ModelKind::kViT ? vit_forward(grid, params, spec_.vit)
                                       : baseline_cnn_forward(grid, params, spec_.cnn);
}

std::size_t Classifier::n_classes() const {
  return spec_.kind == ModelKind::kViT ? spec_.vit.n_classes : spec_.cnn.n_classes;
}

double Classifier::loss_and_accumulate(const Tensor& grid, int label,
                                       const ModelParams& params,
                                       ParamGrads& grads) const {
  Tape tape;
  std::map<std::string, NodeId> leaves;
  NodeId logits = spec_.kind == ModelKind::kViT
                      ? vit_build(tape, grid, params, spec_.vit, &leaves)
                      : cnn_build(tape, grid, params, spec_.cnn, &leaves);
  NodeId loss = tape.softmax_cross_entropy(logits, static_cast<std::size_t>(label));
  tape.backward(loss);
  for (auto& [name, id] : leaves) {
    const Tensor& g = tape.grad(id);
    Tensor& dst = grads.at(name);
    kernels::axpy(1.0, g.data.data(), dst.data.data(), dst.size());
  }
  return tape.value(loss).data[0];
}

double Classifier::loss_only(const Tensor& grid, int label,
                             const ModelParams& params) const {
  Tensor lg = logits(grid, params);
  return softmax_cross_entropy(lg.data, static_cast<std::size_t>(label)).first;
}

TrainResult train(const Classifier& model,
                  const std::vector<const Example*>& train_set,
                  const std::vector<const Example*>& val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");

  ModelParams params = model.init(cfg.seed);
  AdamState state{zero_grads_like(params), zero_grads_like(params)};

  TrainResult result;
  result.params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t no_improve = 0;
  long t = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng epoch_rng(Rng::derive(cfg.seed, 0xE70C0000ULL + epoch));
    epoch_rng.shuffle(order);

    double train_loss_sum = 0.0;
    ParamGrads grads = zero_grads_like(params);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t batch_n = std::min(cfg.batch_size, order.size() - start);
      for (auto& [name, g] : grads) g.fill(0.0);
      for (std::size_t i = 0; i < batch_n; ++i) {
        const Example* ex = train_set[order[start + i]];
        train_loss_sum += model.loss_and_accumulate(ex->grid, ex->label, params, grads);
      }
      const double inv = 1.0 / static_cast<double>(batch_n);
      for (auto& [name, g] : grads) {
        for (double& v : g.data) v *= inv;
      }
      adam_step(params, grads, state, ++t, cfg);
    }
    const double train_loss = train_loss_sum / static_cast<double>(order.size());

    double val_loss = train_loss;
    if (!val_set.empty()) {
      std::vector<double> losses(val_set.size());
      parallel_for(val_set.size(), [&](std::size_t i) {
        losses[i] = model.loss_only(val_set[i]->grid, val_set[i]->label, params);
      });
      val_loss = kernels::sum(losses.data(), losses.size()) /
                 static_cast<double>(losses.size());
    }
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, train_loss, val_loss});
    result.epochs_ran = epoch;

    if (val_loss < best_val) {
      best_val = val_loss;
      result.params = params;
      result.best_epoch = epoch;
      no_improve = 0;
    } else {
      ++no_improve;
    }
    if (!val_set.empty() && no_improve >= cfg.patience) break;
  }
  if (val_set.empty()) {
    // No validation signal: the final epoch wins.
    result.params = params;
    result.best_epoch = result.epochs_ran;
  }
  return result;
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_classes != n_classes) {
    throw std::invalid_argument("ConfusionMatrix::merge: class count mismatch");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix::Counts ConfusionMatrix::binary() const {
  if (n_classes != 2) throw std::invalid_argument("ConfusionMatrix: not binary");
  return Counts{at(1, 1), at(0, 0), at(0, 1), at(1, 0)};
}

ConfusionMatrix::Counts ConfusionMatrix::one_vs_rest(std::size_t c) const {
  Counts out;
  std::size_t row_sum = 0, col_sum = 0;
  for (std::size_t j = 0; j < n_classes; ++j) {
    row_sum += at(c, j);
    col_sum += at(j, c);
  }
  out.tp = at(c, c);
  out.fn = row_sum - out.tp;
  out.fp = col_sum - out.tp;
  out.tn = total() - out.tp - out.fn - out.fp;
  return out;
}

std::size_t argmax_class(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits.data[i] > logits.data[best]) best = i;
  }
  return best;
}

ConfusionMatrix evaluate(const Classifier& model, const ModelParams& params,
                         const std::vector<const Example*>& test_set) {
  ConfusionMatrix cm(model.n_classes());
  std::vector<std::size_t> predicted(test_set.size());
  parallel_for(test_set.size(), [&](std::size_t i) {
    predicted[i] = argmax_class(model.logits(test_set[i]->grid, params));
  });
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    cm.at(static_cast<std::size_t>(test_set[i]->label), predicted[i]) += 1;
  }
  return cm;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

MetricSet metrics_from_counts(const ConfusionMatrix::Counts& c) {
  MetricSet m;
  m.acc = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  m.sen = ratio(c.tp, c.tp + c.fn);
  m.prec = ratio(c.tp, c.tp + c.fp);
  m.spe = ratio(c.tn, c.tn + c.fp);
  if (m.sen && m.spe) m.sco = (*m.sen + *m.spe) / 2.0;
  return m;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& vs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : vs) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

MetricSet compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw std::invalid_argument("compute_metrics: empty confusion matrix");
  if (cm.n_classes == 2) return metrics_from_counts(cm.binary());

  MetricSet m;
  std::size_t trace = 0;
  for (std::size_t c = 0; c < cm.n_classes; ++c) trace += cm.at(c, c);
  m.acc = static_cast<double>(trace) / static_cast<double>(total);

  std::vector<std::optional<double>> sens, spes, precs;
  for (std::size_t c = 0; c < cm.n_classes; ++c) {
    MetricSet per = metrics_from_counts(cm.one_vs_rest(c));
    sens.push_back(per.sen);
    spes.push_back(per.spe);
    precs.push_back(per.prec);
  }
  m.sen = mean_defined(sens);
  m.spe = mean_defined(spes);
  m.prec = mean_defined(precs);
  if (m.sen && m.spe) m.sco = (*m.sen + *m.spe) / 2.0;
  return m;
}

CrossValResult cross_validate(const std::vector<Example>& examples, std::size_t k,
                              const Classifier& model, const TrainConfig& cfg) {
  cfg.validate();
  if (k < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");

  CrossValResult result;
  result.folds.resize(k, FoldResult{0, ConfusionMatrix(model.n_classes()), {}, 0});

  parallel_for(k, [&](std::size_t fold) {
    const std::size_t val_fold = (fold + 1) % k;
    std::vector<const Example*> train_set, val_set, test_set;
    for (const Example& ex : examples) {
      if (ex.fold == fold) {
        test_set.push_back(&ex);
      } else if (ex.fold == val_fold) {
        val_set.push_back(&ex);
      } else {
        train_set.push_back(&ex);
      }
    }
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = Rng::derive(cfg.seed, 0xF01D0000ULL + fold);
    TrainResult trained = train(model, train_set, val_set, fold_cfg);

    FoldResult& fr = result.folds[fold];
    fr.fold = fold;
    fr.cm = evaluate(model, trained.params, test_set);
    fr.metrics = compute_metrics(fr.cm);
    fr.epochs_ran = trained.epochs_ran;
  });

  std::vector<std::optional<double>> accs, sens, spes, precs, scos;
  ConfusionMatrix pooled(model.n_classes());
  for (const FoldResult& fr : result.folds) {
    accs.push_back(fr.metrics.acc);
    sens.push_back(fr.metrics.sen);
    spes.push_back(fr.metrics.spe);
    precs.push_back(fr.metrics.prec);
    scos.push_back(fr.metrics.sco);
    pooled.merge(fr.cm);
  }
  result.mean.acc = mean_defined(accs);
  result.mean.sen = mean_defined(sens);
  result.mean.spe = mean_defined(spes);
  result.mean.prec = mean_defined(precs);
  result.mean.sco = mean_defined(scos);
  result.pooled = compute_metrics(pooled);
  return result;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

std::string results_csv(const CrossValResult& result, Task task,
                        const std::string& representation,
                        const std::string& model_name) {
  std::string out = "task,representation,model,fold,acc,sen,spe,prec,sco,epochs_ran\n";
  auto row = [&](const std::string& fold, const MetricSet& m, const std::string& epochs) {
    out += std::string(task_name(task)) + "," + representation + "," + model_name + "," +
           fold + "," + format_metric(m.acc) + "," + format_metric(m.sen) + "," +
           format_metric(m.spe) + "," + format_metric(m.prec) + "," +
           format_metric(m.sco) + "," + epochs + "\n";
  };
  for (const FoldResult& fr : result.folds) {
    row(std::to_string(fr.fold), fr.metrics, std::to_string(fr.epochs_ran));
  }
  row("mean", result.mean, "");
  row("pooled", result.pooled, "");
  return out;
}

}  // namespace rsl
