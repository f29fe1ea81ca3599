#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rsl/signal.hpp"

namespace rsl {

// ICBHI protocol constants: every cycle is fixed to 6 s at 4 kHz.
inline constexpr std::uint32_t kProtocolRateHz = 4000;
inline constexpr std::size_t kCycleSamples = 24000;

struct CycleAnnotation {
  double start_s = 0.0;
  double end_s = 0.0;
  bool crackle = false;
  bool wheeze = false;
};

struct RespiratoryCycle {
  std::string patient_id;
  std::string recording_id;
  std::size_t cycle_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  Waveform audio;  // exactly kCycleSamples at kProtocolRateHz
  bool crackle = false;
  bool wheeze = false;
};

enum class Task { kWheezeBinary, kCrackleBinary, kFourClass };

const char* task_name(Task task);
Task task_from_name(const std::string& name);
std::size_t task_class_count(Task task);

// Four-class taxonomy: 0 normal, 1 crackle, 2 wheeze, 3 crackle+wheeze.
int assign_label(const RespiratoryCycle& cycle, Task task);
int assign_label(bool crackle, bool wheeze, Task task);

struct FoldPlan {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> assignment;  // patient -> fold

  std::size_t fold_of(const std::string& patient_id) const;
};

// One annotation per nonempty line: start TAB end TAB crackle TAB wheeze.
std::vector<CycleAnnotation> parse_annotations(const std::string& text);
std::string serialize_annotations(const std::vector<CycleAnnotation>& anns);

// Slice each annotated cycle out of a 4 kHz waveform and fix it to 6 s:
// shorter cycles are zero-padded symmetrically (odd remainder goes at the
// end), longer ones are centre-cropped. Annotations past the audio end are
// clamped with a warning.
std::vector<RespiratoryCycle> extract_and_fix_cycles(
    const Waveform& w, const std::vector<CycleAnnotation>& anns,
    const std::string& patient_id, const std::string& recording_id,
    std::vector<std::string>* warnings = nullptr);

// Seeded shuffle then round-robin deal; all cycles of a patient share a fold.
FoldPlan patient_folds(const std::vector<std::string>& patient_ids,
                       std::size_t k, std::uint64_t seed);

struct ClassHistogram {
  std::array<std::size_t, 4> counts{};  // normal, crackle, wheeze, both
  std::size_t total = 0;
};

ClassHistogram class_histogram(const std::vector<RespiratoryCycle>& cycles);

// ICBHI convention: the patient id is the text before the first underscore
// of the recording filename.
std::string patient_id_from_recording(const std::string& recording_id);

struct Corpus {
  std::vector<RespiratoryCycle> cycles;
  FoldPlan folds;
  std::vector<std::string> warnings;
};

// Scans a directory of paired <name>.wav / <name>.txt files, resamples to
// the protocol rate, extracts fixed-length cycles, and assigns patient folds.
Corpus load_corpus(const std::filesystem::path& dir, std::size_t k,
                   std::uint64_t seed);

// Manifest CSV: recording_id, patient_id, cycle_index, start_s, end_s,
// crackle, wheeze, fold.
std::string manifest_csv(const Corpus& corpus);

}  // namespace rsl
