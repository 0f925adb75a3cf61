#ifndef SONICGUIDE_PROTOCOL_H_
#define SONICGUIDE_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sonicguide/earcons.h"
#include "sonicguide/mapping.h"
#include "sonicguide/session_log.h"

namespace sonicguide::protocol {

// Newline-delimited JSON. Every message is one object with a "type" field;
// encode_* return the line without its terminating newline.
inline constexpr int kVersion = 1;

// Client to server.
struct Hello {
  int version = kVersion;
  std::optional<Mode> mode;
  bool operator==(const Hello&) const = default;
};

struct Pos {
  double t = 0.0;
  DisplacementVector p;
  bool operator==(const Pos&) const = default;
};

struct StartTrial {
  std::optional<Mode> mode;
  std::optional<double> start_distance;
  std::uint64_t seed = 0;
  std::optional<double> radius;
  std::optional<double> t;
  bool operator==(const StartTrial&) const = default;
};

struct Abort {
  bool operator==(const Abort&) const = default;
};

// Flushes audio up to `t` (default: the last position) and closes the session.
struct End {
  std::optional<double> t;
  bool operator==(const End&) const = default;
};

using ClientMessage = std::variant<Hello, Pos, StartTrial, Abort, End>;

// Server to client.
struct Welcome {
  int version = kVersion;
  std::string session;
  int rate = 48000;
  int block = 256;
  Mode mode = Mode::k3D;
  bool operator==(const Welcome&) const = default;
};

// 16-bit little-endian mono PCM, base64 on the wire.
struct Audio {
  std::int64_t seq = 0;
  int rate = 48000;
  std::vector<std::int16_t> samples;
  bool operator==(const Audio&) const = default;
};

struct Event {
  EarconEvent event;
  bool operator==(const Event&) const = default;
};

struct TrialStarted {
  int trial = 0;
  double t = 0.0;
  Mode mode = Mode::k3D;
  DisplacementVector start;
  double radius = 0.0;
  std::uint64_t seed = 0;
  bool operator==(const TrialStarted&) const = default;
};

struct TrialResult {
  int trial = 0;
  TrialOutcome outcome = TrialOutcome::kAbort;
  double start_time = 0.0;
  double end_time = 0.0;
  double time_to_target = 0.0;
  double path_length = 0.0;
  int steps = 0;
  bool operator==(const TrialResult&) const = default;
};

struct Error {
  std::string message;
  bool fatal = false;
  bool operator==(const Error&) const = default;
};

using ServerMessage = std::variant<Welcome, Audio, Event, TrialStarted, TrialResult, Error>;

std::string encode(const ClientMessage& message);
std::string encode(const ServerMessage& message);

// Throw ParseError (line 0) on malformed JSON, unknown types, missing or
// mistyped fields.
ClientMessage decode_client(std::string_view line);
ServerMessage decode_server(std::string_view line);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);  // throws ParseError

Audio make_audio(std::int64_t seq, int rate, std::span<const float> frames);
TrialResult make_trial_result(const TrialRecord& record);

}  // namespace sonicguide::protocol

#endif  // SONICGUIDE_PROTOCOL_H_
