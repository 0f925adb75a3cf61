#include "sonicguide/simulated_operator.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include <json.hpp>

#include "sonicguide/error.h"
#include "sonicguide/session.h"

namespace sonicguide {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void OperatorConfig::validate() const {
  synth.validate();
  mapping.validate();
  probe.validate();
  if (trials < 0) throw ValidationError("trials must be >= 0");
  if (!(analysis_window >= probe.min_duration) || !std::isfinite(analysis_window))
    throw ValidationError("analysis_window must be at least the probe minimum duration");
  if (!(step_gain > 0.0) || !std::isfinite(step_gain))
    throw ValidationError("step_gain must be > 0");
  if (!(max_step > 0.0) || !std::isfinite(max_step))
    throw ValidationError("max_step must be > 0");
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (!(start_distance >= 0.0) || !std::isfinite(start_distance))
    throw ValidationError("start_distance must be >= 0");
  if (!(dwell_time >= 0.0) || !(dwell_time < analysis_window))
    throw ValidationError("dwell_time must be in [0, analysis_window)");
  MappingConfig m = mapping;
  m.target_radius = target_radius;
  m.validate();
}

std::uint64_t trial_seed(std::uint64_t run_seed, int index) {
  // splitmix64 finalizer over the run seed and trial index.
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

OperatorReport run_simulated_operator(const OperatorConfig& cfg,
                                      const std::function<void(const TrialRecord&)>& on_trial) {
  cfg.validate();
  MappingConfig mapping = cfg.mapping;
  mapping.target_radius = cfg.target_radius;

  SessionConfig sc;
  sc.synth = cfg.synth;
  sc.mapping = mapping;
  sc.mode = cfg.mode;
  sc.dwell_time = cfg.dwell_time;
  sc.trial_timeout = 1e12;  // trials end on max_steps instead
  sc.start_distance = cfg.start_distance;
  sc.count_updates_as_steps = false;
  sc.session_id = "operator";

  const std::int64_t block = cfg.synth.block_size;
  const auto window_frames =
      static_cast<std::size_t>(std::llround(cfg.analysis_window * cfg.synth.sample_rate));
  const std::int64_t hold_blocks =
      (static_cast<std::int64_t>(window_frames) + block - 1) / block;
  const auto block_time = [&](std::int64_t k) {
    return static_cast<double>(k * block) / cfg.synth.sample_rate;
  };

  std::vector<float> heard;
  std::int64_t heard_from = 0;
  auto sink = [&](std::int64_t seq, double, std::span<const float> frames) {
    if (heard.empty()) heard_from = seq * block;
    heard.insert(heard.end(), frames.begin(), frames.end());
  };
  std::shared_ptr<SessionLogWriter> log;
  if (cfg.log_path) log = std::make_shared<SessionLogWriter>(*cfg.log_path);
  Session session(sc, sink, log);

  std::vector<TrialRecord> records;
  std::int64_t k = 0;  // block at which the current position starts sounding
  for (int i = 0; i < cfg.trials; ++i) {
    TrialSpec spec;
    spec.seed = trial_seed(cfg.seed, i);
    spec.t = block_time(k);
    const TrialDescriptor trial = session.start_trial(spec);
    DisplacementVector p = trial.start;
    DisplacementVector last_move{};
    std::optional<TrialRecord> done;

    for (int step = 0; !done; ++step) {
      heard.clear();
      const std::int64_t k_end = k + hold_blocks;
      session.note_step();
      UpdateResult r = session.update_position(block_time(k_end), p);
      if (r.finished) {
        done = std::move(r.finished);
        k = k_end + 1;
        break;
      }
      if (step + 1 >= cfg.max_steps) {
        done = session.abort_trial(TrialOutcome::kTimeout);
        k = k_end + 1;
        break;
      }
      if (heard_from != k * block || heard.size() < window_frames)
        throw std::logic_error("operator audio out of step with the session");

      AudioBlock audio;
      audio.sample_rate = cfg.synth.sample_rate;
      audio.frames.assign(heard.begin(), heard.begin() + static_cast<std::ptrdiff_t>(window_frames));
      DisplacementVector move;
      try {
        const DisplacementVector decoded = decode_position(audio, mapping, cfg.synth, cfg.probe);
        double mx = -cfg.step_gain * decoded.x;
        double my = -cfg.step_gain * decoded.y;
        double mz = cfg.mode == Mode::k2D ? 0.0 : -cfg.step_gain * decoded.z;
        const double len = std::sqrt(mx * mx + my * my + mz * mz);
        if (len > cfg.max_step) {
          const double s = cfg.max_step / len;
          mx *= s;
          my *= s;
          mz *= s;
        }
        move = make_displacement(mx, my, mz);
      } catch (const AmbiguityError&) {
        session.note_ambiguity();
        move = make_displacement(0.5 * last_move.x, 0.5 * last_move.y, 0.5 * last_move.z);
      } catch (const NoSignalError&) {
        session.note_ambiguity();
        move = make_displacement(0.5 * last_move.x, 0.5 * last_move.y, 0.5 * last_move.z);
      }
      last_move = move;
      p = make_displacement(static_cast<double>(p.x) + move.x, static_cast<double>(p.y) + move.y,
                            static_cast<double>(p.z) + move.z);
      k = k_end + 1;
      r = session.update_position(block_time(k), p);
      if (r.finished) done = std::move(r.finished);
    }
    if (on_trial) on_trial(*done);
    records.push_back(std::move(*done));
  }
  session.finish(block_time(k));
  return summarize(std::move(records));
}

OperatorReport summarize(std::vector<TrialRecord> trials) {
  OperatorReport report;
  std::vector<double> steps, times;
  for (const auto& t : trials) {
    steps.push_back(t.steps);
    if (t.outcome == TrialOutcome::kHit) {
      ++report.hits;
      times.push_back(t.time_to_target);
    }
  }
  report.hit_rate = trials.empty() ? 0.0 : static_cast<double>(report.hits) / trials.size();
  report.median_steps = median(std::move(steps));
  report.median_time = median(std::move(times));
  report.trials = std::move(trials);
  return report;
}

std::string report_json(const OperatorReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"trial", t.trial},
                      {"seed", t.seed},
                      {"outcome", to_string(t.outcome)},
                      {"steps", t.steps},
                      {"time_to_target", t.time_to_target},
                      {"path_length", t.path_length},
                      {"ambiguities", t.ambiguities}});
  }
  const nlohmann::json j{{"trials", report.trials.size()},
                         {"hits", report.hits},
                         {"hit_rate", report.hit_rate},
                         {"median_steps", report.median_steps},
                         {"median_time", report.median_time},
                         {"per_trial", trials}};
  return j.dump(2);
}

}  // namespace sonicguide
