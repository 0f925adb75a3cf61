#include "sonicguide/session_log.h"

#include <json.hpp>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

using nlohmann::json;

json vec_json(const DisplacementVector& d) { return json::array({d.x, d.y, d.z}); }

DisplacementVector vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError(0, "expected [x, y, z]");
  return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

struct Encoder {
  json operator()(const PosRecord& r) const {
    return {{"type", "pos"}, {"t", r.t}, {"x", r.p.x}, {"y", r.p.y}, {"z", r.p.z}};
  }
  json operator()(const EventRecord& r) const {
    return {{"type", "event"}, {"kind", to_string(r.event.kind)}, {"t", r.event.time}};
  }
  json operator()(const TrialStartRecord& r) const {
    return {{"type", "trial_start"}, {"trial", r.trial},       {"t", r.t},
            {"mode", to_string(r.mode)}, {"start", vec_json(r.start)},
            {"target", vec_json(r.target)}, {"radius", r.radius}, {"seed", r.seed}};
  }
  json operator()(const TrialEndRecord& r) const {
    return {{"type", "trial_end"},
            {"trial", r.trial},
            {"t", r.t},
            {"outcome", to_string(r.outcome)},
            {"time_to_target", r.time_to_target},
            {"path_length", r.path_length},
            {"steps", r.steps},
            {"ambiguities", r.ambiguities}};
  }
};

}  // namespace

std::string_view to_string(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::kHit:
      return "hit";
    case TrialOutcome::kTimeout:
      return "timeout";
    case TrialOutcome::kAbort:
      break;
  }
  return "abort";
}

TrialOutcome parse_trial_outcome(std::string_view text) {
  if (text == "hit") return TrialOutcome::kHit;
  if (text == "timeout") return TrialOutcome::kTimeout;
  if (text == "abort") return TrialOutcome::kAbort;
  throw ValidationError("unknown trial outcome '" + std::string(text) + "'");
}

std::string encode_log_record(const LogRecord& record) {
  return std::visit(Encoder{}, record).dump();
}

LogRecord decode_log_record(std::string_view line) {
  try {
    const json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "pos") {
      return PosRecord{j.at("t").get<double>(),
                       {j.at("x").get<float>(), j.at("y").get<float>(), j.at("z").get<float>()}};
    }
    if (type == "event") {
      return EventRecord{{parse_earcon_kind(j.at("kind").get<std::string>()),
                          j.at("t").get<double>()}};
    }
    if (type == "trial_start") {
      TrialStartRecord r;
      r.trial = j.at("trial").get<int>();
      r.t = j.at("t").get<double>();
      r.mode = parse_mode(j.at("mode").get<std::string>());
      r.start = vec_from(j.at("start"));
      r.target = vec_from(j.at("target"));
      r.radius = j.at("radius").get<double>();
      r.seed = j.at("seed").get<std::uint64_t>();
      return r;
    }
    if (type == "trial_end") {
      TrialEndRecord r;
      r.trial = j.at("trial").get<int>();
      r.t = j.at("t").get<double>();
      r.outcome = parse_trial_outcome(j.at("outcome").get<std::string>());
      r.time_to_target = j.at("time_to_target").get<double>();
      r.path_length = j.at("path_length").get<double>();
      r.steps = j.at("steps").get<int>();
      r.ambiguities = j.at("ambiguities").get<int>();
      return r;
    }
    throw ParseError(0, "unknown record type '" + type + "'");
  } catch (const json::exception& e) {
    throw ParseError(0, e.what());
  } catch (const ValidationError& e) {
    throw ParseError(0, e.what());
  }
}

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw IoError("cannot open session log " + path.string());
}

void SessionLogWriter::write(const LogRecord& record) {
  out_ << encode_log_record(record) << '\n';
  if (!out_) throw IoError("failed writing session log " + path_.string());
}

void SessionLogWriter::flush() { out_.flush(); }

std::vector<LogRecord> read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open session log " + path.string());
  std::vector<LogRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(decode_log_record(line));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

Trajectory positions_from_log(std::span<const LogRecord> records, Mode mode,
                              const DisplacementVector& target) {
  Trajectory traj;
  traj.mode = mode;
  for (const auto& r : records) {
    if (const auto* pos = std::get_if<PosRecord>(&r)) {
      traj.samples.push_back({pos->t,
                              {pos->p.x - target.x, pos->p.y - target.y,
                               mode == Mode::k2D ? 0.0f : pos->p.z - target.z}});
    }
  }
  return traj;
}

}  // namespace sonicguide
