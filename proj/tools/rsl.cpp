#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsl/common.hpp"
#include "rsl/dataset.hpp"
#include "rsl/features.hpp"
#include "rsl/io.hpp"
#include "rsl/pipeline.hpp"
#include "rsl/stats.hpp"
#include "rsl/threading.hpp"
#include "rsl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string corpus_dir;
  std::string output_dir = "run";
  std::string representation = "cochleogram";
  std::string model = "vit";
  std::string task = "wheeze-binary";
  std::uint64_t seed = 42;
  std::size_t folds = 10;
  rsl::TrainConfig train;
  rsl::FeatureConfig features;
  rsl::ViTConfig vit;
  rsl::BaselineCnnConfig cnn;
};

rsl::WindowKind window_from_name(const std::string& name) {
  if (name == "hann") return rsl::WindowKind::kHann;
  if (name == "rectangular") return rsl::WindowKind::kRectangular;
  if (name == "blackman-harris") return rsl::WindowKind::kBlackmanHarris;
  throw std::invalid_argument("unknown window: " + name);
}

const char* window_name(rsl::WindowKind kind) {
  switch (kind) {
    case rsl::WindowKind::kHann: return "hann";
    case rsl::WindowKind::kRectangular: return "rectangular";
    case rsl::WindowKind::kBlackmanHarris: return "blackman-harris";
  }
  return "hann";
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void load_config_json(const json& j, RunConfig& cfg) {
  maybe(j, "corpus_dir", cfg.corpus_dir);
  maybe(j, "output_dir", cfg.output_dir);
  maybe(j, "representation", cfg.representation);
  maybe(j, "model", cfg.model);
  maybe(j, "task", cfg.task);
  maybe(j, "seed", cfg.seed);
  maybe(j, "folds", cfg.folds);
  if (j.contains("train")) {
    const json& t = j.at("train");
    maybe(t, "epochs", cfg.train.epochs);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "learning_rate", cfg.train.learning_rate);
    maybe(t, "patience", cfg.train.patience);
  }
  if (j.contains("features")) {
    const json& f = j.at("features");
    maybe(f, "grid_rows", cfg.features.grid_rows);
    maybe(f, "grid_cols", cfg.features.grid_cols);
    if (f.contains("stft")) {
      const json& s = f.at("stft");
      maybe(s, "frame_len", cfg.features.stft_plan.frame_len_samples);
      maybe(s, "hop", cfg.features.stft_plan.hop_samples);
      std::string win = window_name(cfg.features.stft_plan.window_kind);
      maybe(s, "window", win);
      cfg.features.stft_plan.window_kind = window_from_name(win);
      cfg.features.mel.plan = cfg.features.stft_plan;
    }
    if (f.contains("mel")) {
      const json& m = f.at("mel");
      maybe(m, "n_filters", cfg.features.mel.n_filters);
      maybe(m, "n_coeffs", cfg.features.mel.n_coeffs);
      maybe(m, "fmin_hz", cfg.features.mel.fmin_hz);
      maybe(m, "fmax_hz", cfg.features.mel.fmax_hz);
    }
    if (f.contains("cqt")) {
      const json& c = f.at("cqt");
      maybe(c, "f1_hz", cfg.features.cqt.f1_hz);
      maybe(c, "bins_per_octave", cfg.features.cqt.bins_per_octave);
      maybe(c, "n_bins", cfg.features.cqt.n_bins);
      maybe(c, "hop", cfg.features.cqt.hop_samples);
    }
    if (f.contains("cochleogram")) {
      const json& c = f.at("cochleogram");
      maybe(c, "n_filters", cfg.features.cochlea.n_filters);
      maybe(c, "fc_min_hz", cfg.features.cochlea.fc_min_hz);
      maybe(c, "fc_max_hz", cfg.features.cochlea.fc_max_hz);
      maybe(c, "order", cfg.features.cochlea.order);
      maybe(c, "frame_len_s", cfg.features.cochlea.frame_len_s);
      maybe(c, "hop_s", cfg.features.cochlea.hop_s);
    }
  }
  if (j.contains("vit")) {
    const json& v = j.at("vit");
    maybe(v, "patch_rows", cfg.vit.patch_rows);
    maybe(v, "patch_cols", cfg.vit.patch_cols);
    maybe(v, "d_model", cfg.vit.d_model);
    maybe(v, "n_layers", cfg.vit.n_layers);
    maybe(v, "n_heads", cfg.vit.n_heads);
    maybe(v, "d_ff", cfg.vit.d_ff);
  }
  if (j.contains("cnn")) {
    const json& c = j.at("cnn");
    maybe(c, "conv1_channels", cfg.cnn.conv1_channels);
    maybe(c, "conv2_channels", cfg.cnn.conv2_channels);
    maybe(c, "hidden", cfg.cnn.hidden);
  }
}

json effective_config_json(const RunConfig& cfg) {
  json j;
  j["corpus_dir"] = cfg.corpus_dir;
  j["output_dir"] = cfg.output_dir;
  j["representation"] = cfg.representation;
  j["model"] = cfg.model;
  j["task"] = cfg.task;
  j["seed"] = cfg.seed;
  j["folds"] = cfg.folds;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"patience", cfg.train.patience}};
  j["features"] = {
      {"grid_rows", cfg.features.grid_rows},
      {"grid_cols", cfg.features.grid_cols},
      {"stft",
       {{"frame_len", cfg.features.stft_plan.frame_len_samples},
        {"hop", cfg.features.stft_plan.hop_samples},
        {"window", window_name(cfg.features.stft_plan.window_kind)}}},
      {"mel",
       {{"n_filters", cfg.features.mel.n_filters},
        {"n_coeffs", cfg.features.mel.n_coeffs},
        {"fmin_hz", cfg.features.mel.fmin_hz},
        {"fmax_hz", cfg.features.mel.fmax_hz}}},
      {"cqt",
       {{"f1_hz", cfg.features.cqt.f1_hz},
        {"bins_per_octave", cfg.features.cqt.bins_per_octave},
        {"n_bins", cfg.features.cqt.n_bins},
        {"hop", cfg.features.cqt.hop_samples}}},
      {"cochleogram",
       {{"n_filters", cfg.features.cochlea.n_filters},
        {"fc_min_hz", cfg.features.cochlea.fc_min_hz},
        {"fc_max_hz", cfg.features.cochlea.fc_max_hz},
        {"order", cfg.features.cochlea.order},
        {"frame_len_s", cfg.features.cochlea.frame_len_s},
        {"hop_s", cfg.features.cochlea.hop_s}}}};
  j["vit"] = {{"patch_rows", cfg.vit.patch_rows}, {"patch_cols", cfg.vit.patch_cols},
              {"d_model", cfg.vit.d_model},       {"n_layers", cfg.vit.n_layers},
              {"n_heads", cfg.vit.n_heads},       {"d_ff", cfg.vit.d_ff}};
  j["cnn"] = {{"conv1_channels", cfg.cnn.conv1_channels},
              {"conv2_channels", cfg.cnn.conv2_channels},
              {"hidden", cfg.cnn.hidden}};
  return j;
}

std::string corpus_hash_hex(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".wav" || ext == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string digest;
  for (const fs::path& f : files) {
    digest += f.filename().string() + ":" + rsl::io::hex64(rsl::io::hash_file(f)) + ";";
  }
  return rsl::io::hex64(rsl::io::fnv1a64(digest.data(), digest.size()));
}

void write_run_manifest(const RunConfig& cfg, const std::string& command) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = effective_config_json(cfg);
  if (!cfg.corpus_dir.empty() && fs::is_directory(cfg.corpus_dir)) {
    manifest["corpus_hash"] = corpus_hash_hex(cfg.corpus_dir);
  }
  fs::create_directories(cfg.output_dir);
  rsl::io::atomic_write(fs::path(cfg.output_dir) / "run_manifest.json",
                        manifest.dump(2) + "\n");
}

rsl::ModelSpec model_spec_from(const RunConfig& cfg) {
  rsl::ModelSpec spec;
  spec.kind = rsl::model_kind_from_name(cfg.model);
  spec.vit = cfg.vit;
  spec.vit.grid_rows = cfg.features.grid_rows;
  spec.vit.grid_cols = cfg.features.grid_cols;
  spec.cnn = cfg.cnn;
  spec.cnn.in_rows = cfg.features.grid_rows;
  spec.cnn.in_cols = cfg.features.grid_cols;
  const std::size_t n_classes = rsl::task_class_count(rsl::task_from_name(cfg.task));
  spec.vit.n_classes = n_classes;
  spec.cnn.n_classes = n_classes;
  return spec;
}

void require_corpus(const RunConfig& cfg) {
  if (cfg.corpus_dir.empty()) {
    throw std::invalid_argument("no corpus directory given (--corpus or config corpus_dir)");
  }
}

void print_histogram(const rsl::ClassHistogram& hist) {
  std::printf("%-18s %8s\n", "class", "cycles");
  std::printf("%-18s %8zu\n", "crackle", hist.counts[1]);
  std::printf("%-18s %8zu\n", "wheeze", hist.counts[2]);
  std::printf("%-18s %8zu\n", "crackle+wheeze", hist.counts[3]);
  std::printf("%-18s %8zu\n", "normal", hist.counts[0]);
  std::printf("%-18s %8zu\n", "total", hist.total);
}

int cmd_ingest(const RunConfig& cfg) {
  require_corpus(cfg);
  rsl::Corpus corpus = rsl::load_corpus(cfg.corpus_dir, cfg.folds, cfg.seed);
  for (const std::string& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  fs::create_directories(cfg.output_dir);
  rsl::io::atomic_write(fs::path(cfg.output_dir) / "manifest.csv", rsl::manifest_csv(corpus));
  write_run_manifest(cfg, "ingest");
  print_histogram(rsl::class_histogram(corpus.cycles));
  std::printf("manifest: %s (%zu cycles)\n",
              (fs::path(cfg.output_dir) / "manifest.csv").c_str(), corpus.cycles.size());
  return 0;
}

fs::path features_dir(const RunConfig& cfg) {
  return fs::path(cfg.output_dir) / "features" / cfg.representation;
}

int cmd_features(const RunConfig& cfg) {
  require_corpus(cfg);
  rsl::Corpus corpus = rsl::load_corpus(cfg.corpus_dir, cfg.folds, cfg.seed);
  for (const std::string& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  const fs::path dir = features_dir(cfg);
  fs::create_directories(dir);
  rsl::FeatureConfig fc = cfg.features;
  fc.representation = rsl::tf_kind_from_name(cfg.representation);
  rsl::parallel_for(corpus.cycles.size(), [&](std::size_t i) {
    const rsl::RespiratoryCycle& cycle = corpus.cycles[i];
    const fs::path out = dir / rsl::feature_filename(cycle, fc.representation);
    if (fs::exists(out)) return;
    rsl::write_tfm(rsl::extract_feature(cycle.audio, fc), out);
  });
  write_run_manifest(cfg, "features");
  std::printf("features: %zu cycles -> %s\n", corpus.cycles.size(), dir.c_str());
  return 0;
}

int cmd_render(const RunConfig& cfg, std::size_t limit) {
  require_corpus(cfg);
  rsl::Corpus corpus = rsl::load_corpus(cfg.corpus_dir, cfg.folds, cfg.seed);
  const fs::path dir = fs::path(cfg.output_dir) / "render" / cfg.representation;
  fs::create_directories(dir);
  rsl::FeatureConfig fc = cfg.features;
  fc.representation = rsl::tf_kind_from_name(cfg.representation);
  const std::size_t n =
      limit == 0 ? corpus.cycles.size() : std::min(limit, corpus.cycles.size());
  rsl::parallel_for(n, [&](std::size_t i) {
    const rsl::RespiratoryCycle& cycle = corpus.cycles[i];
    rsl::TFMatrix raw = rsl::extract_feature(cycle.audio, fc);
    rsl::TFMatrix norm = raw.kind == rsl::TFKind::kMfcc ? rsl::minmax_normalize(raw)
                                                        : rsl::log_compress_normalize(raw);
    fs::path out = dir / (cycle.recording_id + "_cyc" + std::to_string(cycle.cycle_index) + ".png");
    rsl::render_viridis(norm, out);
  });
  write_run_manifest(cfg, "render");
  std::printf("rendered %zu images -> %s\n", n, dir.c_str());
  return 0;
}

std::vector<rsl::Example> prepare_examples(const RunConfig& cfg, rsl::Corpus& corpus) {
  rsl::FeatureConfig fc = cfg.features;
  fc.representation = rsl::tf_kind_from_name(cfg.representation);
  return rsl::build_examples(corpus, fc, rsl::task_from_name(cfg.task), features_dir(cfg));
}

int cmd_train(const RunConfig& cfg) {
  require_corpus(cfg);
  rsl::Corpus corpus = rsl::load_corpus(cfg.corpus_dir, cfg.folds, cfg.seed);
  for (const std::string& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  std::vector<rsl::Example> examples = prepare_examples(cfg, corpus);

  // Single split: fold 0 tests, fold 1 validates, the rest trains.
  std::vector<const rsl::Example*> train_set, val_set, test_set;
  for (const rsl::Example& ex : examples) {
    if (ex.fold == 0) {
      test_set.push_back(&ex);
    } else if (ex.fold == 1) {
      val_set.push_back(&ex);
    } else {
      train_set.push_back(&ex);
    }
  }
  rsl::Classifier model(model_spec_from(cfg));
  rsl::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  rsl::TrainResult trained = rsl::train(model, train_set, val_set, tc);

  fs::create_directories(cfg.output_dir);
  const fs::path ckpt = fs::path(cfg.output_dir) / "checkpoint.rslm";
  rsl::save_checkpoint(trained.params, ckpt);
  json sidecar;
  sidecar["config"] = effective_config_json(cfg);
  sidecar["seed"] = cfg.seed;
  sidecar["best_epoch"] = trained.best_epoch;
  sidecar["epochs_ran"] = trained.epochs_ran;
  rsl::io::atomic_write(ckpt.string() + ".json", sidecar.dump(2) + "\n");

  rsl::ConfusionMatrix cm = rsl::evaluate(model, trained.params, test_set);
  rsl::MetricSet m = rsl::compute_metrics(cm);
  std::string csv = "task,representation,model,fold,acc,sen,spe,prec,sco,epochs_ran\n";
  csv += cfg.task + "," + cfg.representation + "," + cfg.model + ",0," +
         rsl::format_metric(m.acc) + "," + rsl::format_metric(m.sen) + "," +
         rsl::format_metric(m.spe) + "," + rsl::format_metric(m.prec) + "," +
         rsl::format_metric(m.sco) + "," + std::to_string(trained.epochs_ran) + "\n";
  rsl::io::atomic_write(fs::path(cfg.output_dir) / "results.csv", csv);
  write_run_manifest(cfg, "train");
  std::printf("train: %zu train / %zu val / %zu test, best epoch %zu, test acc %s\n",
              train_set.size(), val_set.size(), test_set.size(), trained.best_epoch,
              rsl::format_metric(m.acc).c_str());
  return 0;
}

int cmd_crossval(const RunConfig& cfg) {
  require_corpus(cfg);
  rsl::Corpus corpus = rsl::load_corpus(cfg.corpus_dir, cfg.folds, cfg.seed);
  for (const std::string& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  std::vector<rsl::Example> examples = prepare_examples(cfg, corpus);

  rsl::Classifier model(model_spec_from(cfg));
  rsl::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  rsl::CrossValResult result =
      rsl::cross_validate(examples, cfg.folds, model, tc);

  fs::create_directories(cfg.output_dir);
  const std::string csv =
      rsl::results_csv(result, rsl::task_from_name(cfg.task), cfg.representation, cfg.model);
  rsl::io::atomic_write(fs::path(cfg.output_dir) / "results.csv", csv);
  write_run_manifest(cfg, "crossval");
  std::printf("crossval: %zu folds, mean acc %s, pooled acc %s -> %s\n", cfg.folds,
              rsl::format_metric(result.mean.acc).c_str(),
              rsl::format_metric(result.pooled.acc).c_str(),
              (fs::path(cfg.output_dir) / "results.csv").c_str());
  return 0;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::istringstream in(rsl::io::read_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

// Per-fold values of one metric column from a results CSV (aggregate rows
// excluded).
std::vector<double> fold_metric_column(const fs::path& path, const std::string& metric) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw rsl::FormatError(path.string() + ": empty CSV");
  const auto& header = rows.front();
  std::size_t metric_col = header.size(), fold_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == metric) metric_col = i;
    if (header[i] == "fold") fold_col = i;
  }
  if (metric_col == header.size() || fold_col == header.size()) {
    throw rsl::FormatError(path.string() + ": no column '" + metric + "' or 'fold'");
  }
  std::vector<double> values;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(metric_col, fold_col)) continue;
    const std::string& fold = row[fold_col];
    if (fold.empty() || fold.find_first_not_of("0123456789") != std::string::npos) continue;
    if (row[metric_col] == "NA") continue;
    values.push_back(std::stod(row[metric_col]));
  }
  if (values.empty()) throw rsl::Error(path.string() + ": no per-fold '" + metric + "' values");
  return values;
}

int cmd_stats(const fs::path& a, const fs::path& b, const std::string& metric,
              double alpha, const std::string& out_path) {
  const std::vector<double> va = fold_metric_column(a, metric);
  const std::vector<double> vb = fold_metric_column(b, metric);
  rsl::stats::TestReport u = rsl::stats::mann_whitney_u(va, vb, alpha);
  if (va.size() != vb.size()) {
    throw rsl::Error("wilcoxon pairing needs equal fold counts (" + std::to_string(va.size()) +
                     " vs " + std::to_string(vb.size()) + ")");
  }
  rsl::stats::TestReport w = rsl::stats::wilcoxon_signed_rank(va, vb, alpha);
  const bool significant = u.significant && w.significant;

  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s_vs_%s[%s],%.6g,%.6g,%s\n", a.stem().c_str(),
                b.stem().c_str(), metric.c_str(), u.p_value, w.p_value,
                significant ? "yes" : "no");
  std::string csv = "comparison,U_p,W_p,significant\n";
  csv += buf;
  if (!out_path.empty()) rsl::io::atomic_write(out_path, csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  struct Row {
    std::string model, representation, task;
    std::string sen, spe, sco, prec, acc;
  };
  std::vector<Row> table;
  for (const std::string& input : inputs) {
    const auto rows = read_csv(input);
    if (rows.empty()) continue;
    const auto& header = rows.front();
    auto col = [&](const std::string& name) -> std::size_t {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
      }
      throw rsl::FormatError(input + ": missing column " + name);
    };
    const std::size_t c_task = col("task"), c_repr = col("representation"),
                      c_model = col("model"), c_fold = col("fold"), c_acc = col("acc"),
                      c_sen = col("sen"), c_spe = col("spe"), c_prec = col("prec"),
                      c_sco = col("sco");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row[c_fold] != "mean") continue;
      table.push_back(Row{row[c_model], row[c_repr], row[c_task], row[c_sen], row[c_spe],
                          row[c_sco], row[c_prec], row[c_acc]});
    }
  }
  std::sort(table.begin(), table.end(), [](const Row& a, const Row& b) {
    return std::tie(a.model, a.representation, a.task) <
           std::tie(b.model, b.representation, b.task);
  });
  std::string csv = "model,representation,task,sen,spe,sco,prec,acc\n";
  for (const Row& r : table) {
    csv += r.model + "," + r.representation + "," + r.task + "," + r.sen + "," + r.spe + "," +
           r.sco + "," + r.prec + "," + r.acc + "\n";
  }
  if (!out_path.empty()) rsl::io::atomic_write(out_path, csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Respiratory-sound classification pipeline"};
  app.require_subcommand(1);

  std::string config_path, corpus_flag, out_flag, repr_flag, model_flag, task_flag;
  std::int64_t seed_flag = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--corpus", corpus_flag, "corpus directory of paired .wav/.txt files");
    sub->add_option("--out", out_flag, "output directory");
    sub->add_option("--seed", seed_flag, "override config seed");
    sub->add_option("--representation", repr_flag, "stft|mfcc|cqt|cochleogram");
    sub->add_option("--model", model_flag, "vit|baseline-cnn");
    sub->add_option("--task", task_flag, "wheeze-binary|crackle-binary|four-class");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "build manifest and class histogram");
  add_common(ingest);
  CLI::App* features = app.add_subcommand("features", "extract and persist TFM1 features");
  add_common(features);
  CLI::App* render = app.add_subcommand("render", "render Viridis PNGs");
  std::size_t render_limit = 0;
  add_common(render);
  render->add_option("--limit", render_limit, "render at most N cycles (0 = all)");
  CLI::App* train = app.add_subcommand("train", "train one split and checkpoint it");
  add_common(train);
  CLI::App* crossval = app.add_subcommand("crossval", "full k-fold cross-validation cell");
  add_common(crossval);

  CLI::App* stats = app.add_subcommand("stats", "paired significance tests over two results CSVs");
  std::string stats_a, stats_b, stats_metric = "acc", stats_out;
  double stats_alpha = 0.05;
  stats->add_option("--a", stats_a, "first results CSV")->required();
  stats->add_option("--b", stats_b, "second results CSV")->required();
  stats->add_option("--metric", stats_metric, "metric column (default acc)");
  stats->add_option("--alpha", stats_alpha, "significance level (default 0.05)");
  stats->add_option("--out", stats_out, "write the stats CSV here");

  CLI::App* report = app.add_subcommand("report", "merge results CSVs into a summary table");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("inputs", report_inputs, "results CSV files")->required();
  report->add_option("--out", report_out, "write the summary CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      load_config_json(json::parse(rsl::io::read_file(config_path)), cfg);
    }
    if (!corpus_flag.empty()) cfg.corpus_dir = corpus_flag;
    if (!out_flag.empty()) cfg.output_dir = out_flag;
    if (!repr_flag.empty()) cfg.representation = repr_flag;
    if (!model_flag.empty()) cfg.model = model_flag;
    if (!task_flag.empty()) cfg.task = task_flag;
    if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);

    if (ingest->parsed()) return cmd_ingest(cfg);
    if (features->parsed()) return cmd_features(cfg);
    if (render->parsed()) return cmd_render(cfg, render_limit);
    if (train->parsed()) return cmd_train(cfg);
    if (crossval->parsed()) return cmd_crossval(cfg);
    if (stats->parsed()) return cmd_stats(stats_a, stats_b, stats_metric, stats_alpha, stats_out);
    if (report->parsed()) return cmd_report(report_inputs, report_out);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const rsl::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
