#ifndef SONICGUIDE_SIMULATED_OPERATOR_H_
#define SONICGUIDE_SIMULATED_OPERATOR_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sonicguide/mapping.h"
#include "sonicguide/probes.h"
#include "sonicguide/session_log.h"
#include "sonicguide/synth.h"

namespace sonicguide {

// A listener that hears `analysis_window` seconds at its current position,
// decodes the displacement from the audio alone and moves against it.
struct OperatorConfig {
  int trials = 100;
  double analysis_window = 1.0;  // seconds of audio per decode
  double step_gain = 0.5;        // move = -step_gain * decoded
  double max_step = 0.2;         // cap on the move length
  int max_steps = 50;            // listening windows per trial
  std::uint64_t seed = 7;
  Mode mode = Mode::k3D;
  double start_distance = 0.8;
  double target_radius = 0.063;
  double dwell_time = 0.5;
  SynthConfig synth;
  MappingConfig mapping;  // target_radius above takes precedence
  ProbeConfig probe;
  std::optional<std::filesystem::path> log_path;  // JSON-lines session log

  void validate() const;  // throws ValidationError
};

struct OperatorReport {
  std::vector<TrialRecord> trials;
  int hits = 0;
  double hit_rate = 0.0;
  double median_steps = 0.0;  // over all trials
  double median_time = 0.0;   // seconds, over hits
};

// Seed of trial `index` (0-based), derived from the run seed.
std::uint64_t trial_seed(std::uint64_t run_seed, int index);

// Runs cfg.trials trials back to back on one session timeline. A trial ends
// with hit after the dwell, or timeout once max_steps windows were heard
// without one. Decoder ambiguity repeats half of the previous move.
OperatorReport run_simulated_operator(
    const OperatorConfig& cfg,
    const std::function<void(const TrialRecord&)>& on_trial = {});

OperatorReport summarize(std::vector<TrialRecord> trials);

// {"trials":N,"hits":H,"hit_rate":...,"median_steps":...,"median_time":...}
std::string report_json(const OperatorReport& report);

}  // namespace sonicguide

#endif  // SONICGUIDE_SIMULATED_OPERATOR_H_
