#include "sonicguide/session.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

double norm2(float a, float b, float c) {
  const double x = a, y = b, z = c;
  return std::sqrt(x * x + y * y + z * z);
}

// Rounding the components to float moves the norm by up to ~1e-7. Walk the
// largest component through neighbouring floats and re-solve the second
// largest until the double-precision norm lands within 1e-9 of the radius.
// Each float step of the largest component moves the solved one by a large
// amount, so its own rounding error is sampled afresh every step.
// Only the first `dims` components may change.
void snap_to_radius(std::array<float, 3>& v, double r, int dims) {
  if (std::abs(norm2(v[0], v[1], v[2]) - r) <= 1e-9) return;
  int k = 0;
  for (int i = 1; i < dims; ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  int j = -1;
  for (int i = 0; i < dims; ++i)
    if (i != k && v[i] != 0.0f && (j < 0 || std::abs(v[i]) > std::abs(v[j]))) j = i;
  if (j < 0) j = (k + 1) % dims;
  const float sign_j = std::signbit(v[j]) ? -1.0f : 1.0f;
  const float sign_k = std::signbit(v[k]) ? -1.0f : 1.0f;
  const std::array<float, 3> base = v;
  float smaller = std::abs(base[k]), larger = smaller;
  for (int step = 0; step < 4096; ++step) {
    std::array<float, 3> c = base;
    if (step % 2 == 0) {
      smaller = std::nextafter(smaller, 0.0f);
      c[k] = sign_k * smaller;
    } else {
      larger = std::nextafter(larger, INFINITY);
      c[k] = sign_k * larger;
    }
    double rest = r * r;
    for (int i = 0; i < 3; ++i)
      if (i != j) rest -= static_cast<double>(c[i]) * c[i];
    if (rest < 0.0) continue;
    c[j] = sign_j * static_cast<float>(std::sqrt(rest));
    if (std::abs(norm2(c[0], c[1], c[2]) - r) <= 1e-9) {
      v = c;
      return;
    }
  }
}

DisplacementVector relative(const DisplacementVector& p, const DisplacementVector& target,
                            Mode mode) {
  return make_displacement(static_cast<double>(p.x) - target.x,
                           static_cast<double>(p.y) - target.y,
                           mode == Mode::k2D ? 0.0 : static_cast<double>(p.z) - target.z);
}

double distance(const DisplacementVector& a, const DisplacementVector& b) {
  const double dx = static_cast<double>(a.x) - b.x;
  const double dy = static_cast<double>(a.y) - b.y;
  const double dz = static_cast<double>(a.z) - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

void SessionConfig::validate() const {
  synth.validate();
  mapping.validate();
  if (!target.finite()) throw ValidationError("target must be finite");
  if (!(dwell_time >= 0.0) || !std::isfinite(dwell_time))
    throw ValidationError("dwell_time must be >= 0");
  if (!(trial_timeout > 0.0) || !std::isfinite(trial_timeout))
    throw ValidationError("trial_timeout must be > 0");
  if (!(start_distance >= 0.0) || !std::isfinite(start_distance))
    throw ValidationError("start_distance must be >= 0");
}

DisplacementVector sample_start_offset(Mode mode, double distance, std::uint64_t seed) {
  if (!(distance >= 0.0) || !std::isfinite(distance))
    throw ValidationError("start distance must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  std::array<float, 3> v{};
  if (mode == Mode::k2D) {
    v = {static_cast<float>(distance * std::cos(phi)),
         static_cast<float>(distance * std::sin(phi)), 0.0f};
  } else {
    // Uniform z on [-1, 1] gives a uniform point on the sphere.
    const double z = 2.0 * unit(rng) - 1.0;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    v = {static_cast<float>(distance * rho * std::cos(phi)),
         static_cast<float>(distance * rho * std::sin(phi)),
         static_cast<float>(distance * z)};
  }
  if (distance > 0.0) snap_to_radius(v, distance, mode == Mode::k2D ? 2 : 3);
  return {v[0], v[1], v[2]};
}

Session::Session(SessionConfig cfg, AudioSink audio, std::shared_ptr<SessionLogWriter> log)
    : cfg_((cfg.validate(), std::move(cfg))),
      audio_(std::move(audio)),
      log_(std::move(log)),
      renderer_(cfg_.synth, cfg_.mapping, cfg_.mode, cfg_.earcons),
      mapping_(cfg_.mapping),
      block_(static_cast<std::size_t>(cfg_.synth.block_size)) {}

void Session::log(const LogRecord& record) {
  if (log_) log_->write(record);
}

std::vector<EarconEvent> Session::pump() {
  std::vector<EarconEvent> out;
  EventSet events;
  while (true) {
    const std::int64_t seq = renderer_.blocks_rendered();
    const double t = renderer_.next_block_time();
    const std::size_t n = renderer_.render_next(block_, events);
    if (n == 0) break;
    if (audio_) audio_(seq, t, std::span<const float>(block_.data(), n));
    for (int i = 0; i < events.count; ++i) {
      const EarconEvent e{events.kinds[i], t};
      out.push_back(e);
      log(EventRecord{e});
      if (active_) active_->record.events.push_back(e);
      if (on_event_) on_event_(e);
    }
  }
  return out;
}

TrialDescriptor Session::start_trial(const TrialSpec& spec) {
  if (active_) throw ConflictError("a trial is already active");
  if (renderer_.finished()) throw ValidationError("session finished");
  const Mode mode = spec.mode.value_or(cfg_.mode);
  const double start_distance = spec.start_distance.value_or(cfg_.start_distance);
  MappingConfig mapping = cfg_.mapping;
  mapping.target_radius = spec.target_radius.value_or(cfg_.mapping.target_radius);
  mapping.validate();

  const double block_seconds = cfg_.synth.block_size / cfg_.synth.sample_rate;
  const auto last = renderer_.last_time();
  const double t0 = spec.t.value_or(last ? *last + block_seconds : 0.0);
  if (!std::isfinite(t0)) throw ValidationError("trial start time must be finite");
  if (last && !(t0 > *last))
    throw ValidationError("trial start time must follow the last position");

  const DisplacementVector offset = sample_start_offset(mode, start_distance, spec.seed);
  const DisplacementVector start = make_displacement(
      static_cast<double>(cfg_.target.x) + offset.x, static_cast<double>(cfg_.target.y) + offset.y,
      mode == Mode::k2D ? 0.0 : static_cast<double>(cfg_.target.z) + offset.z);

  renderer_.reconfigure(mapping, mode);
  mapping_ = mapping;

  Active active;
  TrialRecord& r = active.record;
  r.trial = next_trial_++;
  r.mode = mode;
  r.start_time = t0;
  r.start_position = start;
  r.target_radius = mapping.target_radius;
  r.seed = spec.seed;
  r.path.mode = mode;
  active_ = std::move(active);
  log(TrialStartRecord{r.trial, t0, mode, start, cfg_.target, r.target_radius, spec.seed});

  const TrialDescriptor descriptor{r.trial, mode, t0, start, r.target_radius, spec.seed};
  update_position(t0, start);
  return descriptor;
}

UpdateResult Session::update_position(double t, const DisplacementVector& position) {
  UpdateResult result;
  if (!std::isfinite(t)) {
    result.reason = "time must be finite";
    return result;
  }
  if (!position.finite()) {
    result.reason = "position must be finite";
    return result;
  }
  if (const auto last = renderer_.last_time(); last && !(t > *last)) {
    result.reason = "stale timestamp";
    return result;
  }
  if (renderer_.finished()) {
    result.reason = "session finished";
    return result;
  }

  const Mode mode = renderer_.mode();
  DisplacementVector p = position;
  if (mode == Mode::k2D) p.z = 0.0f;
  const DisplacementVector d = relative(p, cfg_.target, mode);
  renderer_.push(t, d);
  result.accepted = true;
  log(PosRecord{t, p});

  if (active_) {
    TrialRecord& r = active_->record;
    if (!r.path.samples.empty() && !(r.path.samples.back().d == p)) {
      r.path_length += distance(r.path.samples.back().d, p);
      if (cfg_.count_updates_as_steps) ++r.steps;
    }
    r.path.samples.push_back({t, p});
  }
  result.events = pump();

  if (active_) {
    if (in_target_zone(d, mapping_)) {
      if (!active_->zone_since) active_->zone_since = t;
      if (t - *active_->zone_since >= cfg_.dwell_time)
        result.finished = end_trial(t, TrialOutcome::kHit);
    } else {
      active_->zone_since.reset();
    }
    if (active_ && t - active_->record.start_time >= cfg_.trial_timeout)
      result.finished = end_trial(t, TrialOutcome::kTimeout);
  }
  return result;
}

TrialRecord Session::end_trial(double t, TrialOutcome outcome) {
  TrialRecord r = std::move(active_->record);
  active_.reset();
  r.end_time = t;
  r.outcome = outcome;
  r.time_to_target = t - r.start_time;
  log(TrialEndRecord{r.trial, t, outcome, r.time_to_target, r.path_length, r.steps,
                     r.ambiguities});
  if (log_) log_->flush();
  trials_.push_back(r);
  return r;
}

void Session::note_step() {
  if (active_) ++active_->record.steps;
}

void Session::note_ambiguity() {
  if (active_) ++active_->record.ambiguities;
}

std::optional<TrialRecord> Session::abort_trial(TrialOutcome outcome) {
  if (!active_) return std::nullopt;
  const double t = renderer_.last_time().value_or(active_->record.start_time);
  return end_trial(t, outcome);
}

std::vector<EarconEvent> Session::finish(double end_time) {
  abort_trial();
  renderer_.finish(end_time);
  auto events = pump();
  if (log_) log_->flush();
  return events;
}

}  // namespace sonicguide
