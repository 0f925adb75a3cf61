#ifndef SONICGUIDE_SESSION_H_
#define SONICGUIDE_SESSION_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sonicguide/earcons.h"
#include "sonicguide/mapping.h"
#include "sonicguide/session_log.h"
#include "sonicguide/stream.h"
#include "sonicguide/synth.h"

namespace sonicguide {

struct SessionConfig {
  SynthConfig synth;
  MappingConfig mapping;
  Mode mode = Mode::k3D;
  DisplacementVector target;  // workspace coordinates
  double dwell_time = 0.5;     // seconds inside the zone that count as a hit
  double trial_timeout = 120.0;
  double start_distance = 0.8;
  bool earcons = true;
  // When false, steps are only counted through Session::note_step().
  bool count_updates_as_steps = true;
  std::string session_id = "session";

  void validate() const;  // throws ValidationError
};

struct TrialSpec {
  std::optional<Mode> mode;
  std::optional<double> start_distance;
  std::uint64_t seed = 0;
  std::optional<double> target_radius;
  // Start time. Defaults to one block after the last accepted position, or 0.
  std::optional<double> t;
};

struct TrialDescriptor {
  int trial = 0;
  Mode mode = Mode::k3D;
  double t = 0.0;
  DisplacementVector start;  // workspace coordinates
  double target_radius = 0.0;
  std::uint64_t seed = 0;
};

struct UpdateResult {
  bool accepted = false;
  std::string reason;               // set when rejected
  std::vector<EarconEvent> events;  // from blocks rendered by this update
  std::optional<TrialRecord> finished;
};

// Point on the sphere (circle in 2D) of radius `distance`, uniform in
// direction and deterministic in `seed`. Components are single precision; the
// norm evaluated in double stays within 1e-9 of `distance`.
DisplacementVector sample_start_offset(Mode mode, double distance, std::uint64_t seed);

// One guidance session, independent of any transport.
//
// Audio is clocked by position timestamps: every accepted position releases
// the blocks that end by its time, and each block is handed to the audio sink
// as soon as it is rendered. Positions are accepted with or without an active
// trial; trials only add dwell/timeout bookkeeping and a TrialRecord.
class Session {
 public:
  using AudioSink = std::function<void(std::int64_t seq, double t, std::span<const float>)>;
  using EventSink = std::function<void(const EarconEvent&)>;

  explicit Session(SessionConfig cfg, AudioSink audio = {},
                   std::shared_ptr<SessionLogWriter> log = nullptr);

  // Called for every event as its block is rendered, before the call that
  // rendered it returns.
  void set_event_sink(EventSink sink) { on_event_ = std::move(sink); }

  // Throws ConflictError while a trial is active, ValidationError on bad
  // parameters or a start time not after the last position.
  TrialDescriptor start_trial(const TrialSpec& spec);

  // Workspace position at time t. Stale or non-finite input is rejected and
  // leaves the session unchanged. A trial counts one step per update that
  // changes the position.
  UpdateResult update_position(double t, const DisplacementVector& position);

  // Counted in the active trial's record.
  void note_step();
  void note_ambiguity();

  // Ends the active trial at the last position time.
  std::optional<TrialRecord> abort_trial(TrialOutcome outcome = TrialOutcome::kAbort);

  // Renders the remaining audio up to `end_time` and closes the stream. An
  // active trial is aborted first.
  std::vector<EarconEvent> finish(double end_time);

  bool trial_active() const { return active_.has_value(); }
  const std::vector<TrialRecord>& trials() const { return trials_; }
  const SessionConfig& config() const { return cfg_; }
  Mode mode() const { return renderer_.mode(); }
  std::optional<double> last_time() const { return renderer_.last_time(); }
  std::int64_t blocks_rendered() const { return renderer_.blocks_rendered(); }

 private:
  struct Active {
    TrialRecord record;
    std::optional<double> zone_since;
  };

  std::vector<EarconEvent> pump();
  TrialRecord end_trial(double t, TrialOutcome outcome);
  void log(const LogRecord& record);

  SessionConfig cfg_;
  AudioSink audio_;
  EventSink on_event_;
  std::shared_ptr<SessionLogWriter> log_;
  StreamRenderer renderer_;
  MappingConfig mapping_;
  std::vector<float> block_;
  std::optional<Active> active_;
  std::vector<TrialRecord> trials_;
  int next_trial_ = 1;
};

}  // namespace sonicguide

#endif  // SONICGUIDE_SESSION_H_
