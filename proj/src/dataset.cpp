#include "rsl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rsl/common.hpp"
#include "rsl/io.hpp"
#include "rsl/rng.hpp"
#include "rsl/threading.hpp"

namespace rsl {

const char* task_name(Task task) {
  switch (task) {
    case Task::kWheezeBinary: return "wheeze-binary";
    case Task::kCrackleBinary: return "crackle-binary";
    case Task::kFourClass: return "four-class";
  }
  return "unknown";
}

Task task_from_name(const std::string& name) {
  if (name == "wheeze-binary") return Task::kWheezeBinary;
  if (name == "crackle-binary") return Task::kCrackleBinary;
  if (name == "four-class") return Task::kFourClass;
  throw std::invalid_argument("unknown task: " + name);
}

std::size_t task_class_count(Task task) {
  return task == Task::kFourClass ? 4 : 2;
}

int assign_label(bool crackle, bool wheeze, Task task) {
  switch (task) {
    case Task::kWheezeBinary: return wheeze ? 1 : 0;
    case Task::kCrackleBinary: return crackle ? 1 : 0;
    case Task::kFourClass:
      if (crackle && wheeze) return 3;
      if (wheeze) return 2;
      if (crackle) return 1;
      return 0;
  }
  return 0;
}

int assign_label(const RespiratoryCycle& cycle, Task task) {
  return assign_label(cycle.crackle, cycle.wheeze, task);
}

std::size_t FoldPlan::fold_of(const std::string& patient_id) const {
  auto it = assignment.find(patient_id);
  if (it == assignment.end()) {
    throw std::invalid_argument("fold plan does not cover patient " + patient_id);
  }
  return it->second;
}

namespace {

double parse_number(const std::string& field, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, "non-numeric field '" + field + "'");
  }
  if (pos != field.size()) {
    throw ParseError(line_no, "trailing junk in field '" + field + "'");
  }
  return v;
}

bool parse_flag(const std::string& field, std::size_t line_no) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw ParseError(line_no, "flag must be 0 or 1, got '" + field + "'");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::vector<CycleAnnotation> parse_annotations(const std::string& text) {
  std::vector<CycleAnnotation> anns;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    CycleAnnotation ann;
    ann.start_s = parse_number(fields[0], line_no);
    ann.end_s = parse_number(fields[1], line_no);
    ann.crackle = parse_flag(fields[2], line_no);
    ann.wheeze = parse_flag(fields[3], line_no);
    if (ann.start_s < 0.0) throw ParseError(line_no, "negative start time");
    if (ann.end_s <= ann.start_s) throw ParseError(line_no, "end time not after start");
    anns.push_back(ann);
  }
  return anns;
}

std::string serialize_annotations(const std::vector<CycleAnnotation>& anns) {
  std::string out;
  char buf[96];
  for (const CycleAnnotation& a : anns) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%d\t%d\n", a.start_s, a.end_s,
                  a.crackle ? 1 : 0, a.wheeze ? 1 : 0);
    out += buf;
  }
  return out;
}

namespace {

std::vector<double> fix_cycle_length(std::vector<double> samples) {
  if (samples.size() == kCycleSamples) return samples;
  if (samples.size() > kCycleSamples) {
    const std::size_t offset = (samples.size() - kCycleSamples) / 2;
    return std::vector<double>(samples.begin() + static_cast<std::ptrdiff_t>(offset),
                               samples.begin() + static_cast<std::ptrdiff_t>(offset + kCycleSamples));
  }
  const std::size_t deficit = kCycleSamples - samples.size();
  const std::size_t left = deficit / 2;  // odd remainder lands at the end
  std::vector<double> out(kCycleSamples, 0.0);
  std::copy(samples.begin(), samples.end(), out.begin() + static_cast<std::ptrdiff_t>(left));
  return out;
}

}  // namespace

std::vector<RespiratoryCycle> extract_and_fix_cycles(
    const Waveform& w, const std::vector<CycleAnnotation>& anns,
    const std::string& patient_id, const std::string& recording_id,
    std::vector<std::string>* warnings) {
  if (w.sample_rate_hz != kProtocolRateHz) {
    throw std::invalid_argument("extract_and_fix_cycles: waveform must be at 4 kHz");
  }
  std::vector<RespiratoryCycle> cycles;
  cycles.reserve(anns.size());
  const std::size_t len = w.samples.size();
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const CycleAnnotation& a = anns[i];
    std::size_t start = static_cast<std::size_t>(std::llround(a.start_s * kProtocolRateHz));
    std::size_t end = static_cast<std::size_t>(std::llround(a.end_s * kProtocolRateHz));
    if (start > len) start = len;
    if (end > len) {
      if (warnings != nullptr) {
        warnings->push_back(recording_id + " cycle " + std::to_string(i) +
                            ": annotation extends past audio end, clamped");
      }
      end = len;
    }
    RespiratoryCycle cycle;
    cycle.patient_id = patient_id;
    cycle.recording_id = recording_id;
    cycle.cycle_index = i;
    cycle.start_s = a.start_s;
    cycle.end_s = a.end_s;
    cycle.crackle = a.crackle;
    cycle.wheeze = a.wheeze;
    cycle.audio.sample_rate_hz = kProtocolRateHz;
    cycle.audio.samples = fix_cycle_length(
        std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                            w.samples.begin() + static_cast<std::ptrdiff_t>(end)));
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

FoldPlan patient_folds(const std::vector<std::string>& patient_ids,
                       std::size_t k, std::uint64_t seed) {
  std::set<std::string> distinct(patient_ids.begin(), patient_ids.end());
  if (k == 0 || distinct.size() < k) {
    throw std::invalid_argument("patient_folds: need at least " + std::to_string(k) +
                                " distinct patients, have " + std::to_string(distinct.size()));
  }
  std::vector<std::string> ordered(distinct.begin(), distinct.end());
  Rng rng(seed);
  rng.shuffle(ordered);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    plan.assignment[ordered[i]] = i % k;
  }
  return plan;
}

ClassHistogram class_histogram(const std::vector<RespiratoryCycle>& cycles) {
  ClassHistogram hist;
  for (const RespiratoryCycle& c : cycles) {
    ++hist.counts[static_cast<std::size_t>(assign_label(c, Task::kFourClass))];
  }
  hist.total = cycles.size();
  return hist;
}

std::string patient_id_from_recording(const std::string& recording_id) {
  std::size_t underscore = recording_id.find('_');
  return underscore == std::string::npos ? recording_id : recording_id.substr(0, underscore);
}

Corpus load_corpus(const std::filesystem::path& dir, std::size_t k, std::uint64_t seed) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("corpus directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> wavs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      wavs.push_back(entry.path());
    }
  }
  std::sort(wavs.begin(), wavs.end());

  Corpus corpus;
  std::vector<std::vector<RespiratoryCycle>> per_recording(wavs.size());
  std::vector<std::vector<std::string>> per_warnings(wavs.size());
  parallel_for(wavs.size(), [&](std::size_t i) {
    const std::filesystem::path& wav_path = wavs[i];
    std::filesystem::path txt_path = wav_path;
    txt_path.replace_extension(".txt");
    if (!std::filesystem::exists(txt_path)) {
      per_warnings[i].push_back(wav_path.filename().string() + ": no annotation file, skipped");
      return;
    }
    const std::string recording_id = wav_path.stem().string();
    const std::string patient_id = patient_id_from_recording(recording_id);
    Waveform w = io::read_wav(wav_path);
    w = resample(w, kProtocolRateHz);
    std::vector<CycleAnnotation> anns;
    try {
      anns = parse_annotations(io::read_file(txt_path));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), txt_path.string() + ": " + e.what());
    }
    per_recording[i] =
        extract_and_fix_cycles(w, anns, patient_id, recording_id, &per_warnings[i]);
  });

  std::vector<std::string> patients;
  for (std::size_t i = 0; i < wavs.size(); ++i) {
    for (auto& c : per_recording[i]) corpus.cycles.push_back(std::move(c));
    for (auto& msg : per_warnings[i]) corpus.warnings.push_back(std::move(msg));
  }
  for (const RespiratoryCycle& c : corpus.cycles) patients.push_back(c.patient_id);
  if (corpus.cycles.empty()) {
    throw Error("corpus contains no cycles: " + dir.string());
  }
  corpus.folds = patient_folds(patients, k, seed);
  return corpus;
}

std::string manifest_csv(const Corpus& corpus) {
  std::string out = "recording_id,patient_id,cycle_index,start_s,end_s,crackle,wheeze,fold\n";
  char buf[256];
  for (const RespiratoryCycle& c : corpus.cycles) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,%.6f,%d,%d,%zu\n",
                  c.recording_id.c_str(), c.patient_id.c_str(), c.cycle_index, c.start_s,
                  c.end_s, c.crackle ? 1 : 0, c.wheeze ? 1 : 0,
                  corpus.folds.fold_of(c.patient_id));
    out += buf;
  }
  return out;
}

}  // namespace rsl
