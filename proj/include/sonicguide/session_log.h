#ifndef SONICGUIDE_SESSION_LOG_H_
#define SONICGUIDE_SESSION_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sonicguide/earcons.h"
#include "sonicguide/mapping.h"
#include "sonicguide/trajectory.h"

namespace sonicguide {

enum class TrialOutcome { kHit, kTimeout, kAbort };

std::string_view to_string(TrialOutcome outcome);
TrialOutcome parse_trial_outcome(std::string_view text);

struct TrialRecord {
  int trial = 0;
  Mode mode = Mode::k3D;
  double start_time = 0.0;
  double end_time = 0.0;
  DisplacementVector start_position;
  double target_radius = 0.0;
  std::uint64_t seed = 0;
  Trajectory path;  // workspace positions, start position first
  std::vector<EarconEvent> events;
  TrialOutcome outcome = TrialOutcome::kAbort;
  double time_to_target = 0.0;  // end_time - start_time
  double path_length = 0.0;     // normalized units
  int steps = 0;                // position updates, or operator moves
  int ambiguities = 0;          // operator decodes that were ambiguous
};

// One JSON object per line; "type" is pos, event, trial_start or trial_end.
struct PosRecord {
  double t = 0.0;
  DisplacementVector p;
  bool operator==(const PosRecord&) const = default;
};

struct EventRecord {
  EarconEvent event;
  bool operator==(const EventRecord&) const = default;
};

struct TrialStartRecord {
  int trial = 0;
  double t = 0.0;
  Mode mode = Mode::k3D;
  DisplacementVector start;
  DisplacementVector target;
  double radius = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const TrialStartRecord&) const = default;
};

struct TrialEndRecord {
  int trial = 0;
  double t = 0.0;
  TrialOutcome outcome = TrialOutcome::kAbort;
  double time_to_target = 0.0;
  double path_length = 0.0;
  int steps = 0;
  int ambiguities = 0;
  bool operator==(const TrialEndRecord&) const = default;
};

using LogRecord = std::variant<PosRecord, EventRecord, TrialStartRecord, TrialEndRecord>;

std::string encode_log_record(const LogRecord& record);
// Throws ParseError (line 0).
LogRecord decode_log_record(std::string_view line);

// Appends records to a file, one per line.
class SessionLogWriter {
 public:
  explicit SessionLogWriter(const std::filesystem::path& path);  // throws IoError

  void write(const LogRecord& record);
  void flush();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Throws IoError, or ParseError with the 1-based line number.
std::vector<LogRecord> read_session_log(const std::filesystem::path& path);

// Accepted positions as a displacement trajectory relative to `target`.
Trajectory positions_from_log(std::span<const LogRecord> records, Mode mode = Mode::k3D,
                              const DisplacementVector& target = {});

}  // namespace sonicguide

#endif  // SONICGUIDE_SESSION_LOG_H_
