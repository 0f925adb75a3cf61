#include "sonicguide/protocol.h"

#include <algorithm>
#include <exception>
#include <string>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

#include "sonicguide/error.h"
#include "sonicguide/wav.h"

namespace sonicguide::protocol {

namespace {

using nlohmann::json;

json vec_json(const DisplacementVector& d) { return json::array({d.x, d.y, d.z}); }

DisplacementVector vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError(0, "expected [x, y, z]");
  return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::optional<Mode> optional_mode(const json& j) {
  const auto text = optional_field<std::string>(j, "mode");
  if (!text) return std::nullopt;
  return parse_mode(*text);
}

void put_optional(json& j, const char* key, const auto& value) {
  if (value) j[key] = *value;
}

struct ClientEncoder {
  json operator()(const Hello& m) const {
    json j{{"type", "hello"}, {"version", m.version}};
    if (m.mode) j["mode"] = to_string(*m.mode);
    return j;
  }
  json operator()(const Pos& m) const {
    return {{"type", "pos"}, {"t", m.t}, {"x", m.p.x}, {"y", m.p.y}, {"z", m.p.z}};
  }
  json operator()(const StartTrial& m) const {
    json j{{"type", "start_trial"}, {"seed", m.seed}};
    if (m.mode) j["mode"] = to_string(*m.mode);
    put_optional(j, "start_distance", m.start_distance);
    put_optional(j, "radius", m.radius);
    put_optional(j, "t", m.t);
    return j;
  }
  json operator()(const Abort&) const { return {{"type", "abort"}}; }
  json operator()(const End& m) const {
    json j{{"type", "end"}};
    put_optional(j, "t", m.t);
    return j;
  }
};

struct ServerEncoder {
  json operator()(const Welcome& m) const {
    return {{"type", "hello"},  {"version", m.version}, {"session", m.session},
            {"rate", m.rate},   {"block", m.block},     {"format", "pcm16le"},
            {"mode", to_string(m.mode)}};
  }
  json operator()(const Audio& m) const {
    std::vector<std::uint8_t> bytes(m.samples.size() * 2);
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
      const auto v = static_cast<std::uint16_t>(m.samples[i]);
      bytes[2 * i] = static_cast<std::uint8_t>(v & 0xff);
      bytes[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
    }
    return {{"type", "audio"}, {"seq", m.seq},  {"format", "pcm16le"},
            {"rate", m.rate},  {"data", base64_encode(bytes)}};
  }
  json operator()(const Event& m) const {
    return {{"type", "event"}, {"kind", to_string(m.event.kind)}, {"t", m.event.time}};
  }
  json operator()(const TrialStarted& m) const {
    return {{"type", "trial_start"},      {"trial", m.trial},
            {"t", m.t},                   {"mode", to_string(m.mode)},
            {"start", vec_json(m.start)}, {"radius", m.radius},
            {"seed", m.seed}};
  }
  json operator()(const TrialResult& m) const {
    return {{"type", "trial_result"},
            {"trial", m.trial},
            {"outcome", to_string(m.outcome)},
            {"start_time", m.start_time},
            {"end_time", m.end_time},
            {"time_to_target", m.time_to_target},
            {"path_length", m.path_length},
            {"steps", m.steps}};
  }
  json operator()(const Error& m) const {
    return {{"type", "error"}, {"message", m.message}, {"fatal", m.fatal}};
  }
};

json parse_object(std::string_view line) {
  json j = json::parse(line);
  if (!j.is_object()) throw ParseError(0, "message must be a JSON object");
  return j;
}

// Runs `body`, turning JSON and value errors into ParseError.
template <typename F>
auto guarded(F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad message: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, std::string("bad message: ") + e.what());
  }
}

std::uint64_t seed_field(const json& j) {
  if (!j.contains("seed")) return 0;
  if (!j["seed"].is_number_unsigned()) throw ParseError(0, "seed must be a non-negative integer");
  return j["seed"].get<std::uint64_t>();
}

}  // namespace

std::string encode(const ClientMessage& message) {
  return std::visit(ClientEncoder{}, message).dump();
}

std::string encode(const ServerMessage& message) {
  return std::visit(ServerEncoder{}, message).dump();
}

ClientMessage decode_client(std::string_view line) {
  return guarded([&]() -> ClientMessage {
    const json j = parse_object(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "hello") return Hello{j.value("version", kVersion), optional_mode(j)};
    if (type == "pos") {
      return Pos{j.at("t").get<double>(),
                 {j.at("x").get<float>(), j.at("y").get<float>(), j.value("z", 0.0f)}};
    }
    if (type == "start_trial") {
      return StartTrial{optional_mode(j), optional_field<double>(j, "start_distance"),
                        seed_field(j), optional_field<double>(j, "radius"),
                        optional_field<double>(j, "t")};
    }
    if (type == "abort") return Abort{};
    if (type == "end") return End{optional_field<double>(j, "t")};
    throw ParseError(0, "unknown message type '" + type + "'");
  });
}

ServerMessage decode_server(std::string_view line) {
  return guarded([&]() -> ServerMessage {
    const json j = parse_object(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "hello") {
      return Welcome{j.at("version").get<int>(), j.at("session").get<std::string>(),
                     j.at("rate").get<int>(), j.at("block").get<int>(),
                     parse_mode(j.at("mode").get<std::string>())};
    }
    if (type == "audio") {
      if (j.at("format").get<std::string>() != "pcm16le")
        throw ParseError(0, "unsupported audio format");
      const auto bytes = base64_decode(j.at("data").get<std::string>());
      if (bytes.size() % 2 != 0) throw ParseError(0, "odd pcm16 payload");
      Audio a{j.at("seq").get<std::int64_t>(), j.at("rate").get<int>(), {}};
      a.samples.resize(bytes.size() / 2);
      for (std::size_t i = 0; i < a.samples.size(); ++i) {
        a.samples[i] = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
      }
      return a;
    }
    if (type == "event") {
      return Event{{parse_earcon_kind(j.at("kind").get<std::string>()),
                    j.at("t").get<double>()}};
    }
    if (type == "trial_start") {
      return TrialStarted{j.at("trial").get<int>(),
                          j.at("t").get<double>(),
                          parse_mode(j.at("mode").get<std::string>()),
                          vec_from(j.at("start")),
                          j.at("radius").get<double>(),
                          j.at("seed").get<std::uint64_t>()};
    }
    if (type == "trial_result") {
      return TrialResult{j.at("trial").get<int>(),
                         parse_trial_outcome(j.at("outcome").get<std::string>()),
                         j.at("start_time").get<double>(),
                         j.at("end_time").get<double>(),
                         j.at("time_to_target").get<double>(),
                         j.at("path_length").get<double>(),
                         j.at("steps").get<int>()};
    }
    if (type == "error") {
      return Error{j.at("message").get<std::string>(), j.value("fatal", false)};
    }
    throw ParseError(0, "unknown message type '" + type + "'");
  });
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  namespace it = boost::archive::iterators;
  using Encoder = it::base64_from_binary<it::transform_width<const std::uint8_t*, 6, 8>>;
  // The bit regrouping reads whole 3-byte groups, so pad with zeros first and
  // mark the padding with '=' afterwards.
  const std::size_t pad = (3 - bytes.size() % 3) % 3;
  std::vector<std::uint8_t> padded(bytes.begin(), bytes.end());
  padded.resize(bytes.size() + pad, 0);
  std::string out(Encoder(padded.data()), Encoder(padded.data() + padded.size()));
  std::fill(out.end() - static_cast<std::ptrdiff_t>(pad), out.end(), '=');
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  namespace it = boost::archive::iterators;
  using Decoder = it::transform_width<it::binary_from_base64<const char*>, 8, 6>;
  if (text.size() % 4 != 0) throw ParseError(0, "base64 length must be a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  std::string body(text);
  std::fill(body.end() - static_cast<std::ptrdiff_t>(pad), body.end(), 'A');
  for (const char c : body) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '/')
      throw ParseError(0, "invalid base64 character");
  }
  std::vector<std::uint8_t> out;
  try {
    for (Decoder d(body.data()), e(body.data() + body.size()); d != e; ++d)
      out.push_back(static_cast<std::uint8_t>(*d));
  } catch (const std::exception& e) {
    throw ParseError(0, std::string("invalid base64: ") + e.what());
  }
  out.resize(body.size() / 4 * 3 - pad);
  return out;
}

Audio make_audio(std::int64_t seq, int rate, std::span<const float> frames) {
  Audio a{seq, rate, {}};
  a.samples.resize(frames.size());
  std::transform(frames.begin(), frames.end(), a.samples.begin(), to_pcm16);
  return a;
}

TrialResult make_trial_result(const TrialRecord& r) {
  return {r.trial, r.outcome, r.start_time, r.end_time, r.time_to_target, r.path_length,
          r.steps};
}

}  // namespace sonicguide::protocol
