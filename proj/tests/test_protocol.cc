#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "sonicguide/error.h"
#include "sonicguide/protocol.h"
#include "sonicguide/wav.h"

namespace sonicguide::protocol {
namespace {

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

TEST(Base64, Rfc4648Vectors) {
  const std::vector<std::pair<std::string, std::string>> vectors = {
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"},
  };
  for (const auto& [plain, encoded] : vectors) {
    EXPECT_EQ(base64_encode(bytes(plain)), encoded) << plain;
    EXPECT_EQ(base64_decode(encoded), bytes(plain)) << encoded;
  }
}

TEST(Base64, RandomRoundTrip) {
  std::mt19937 rng(2);
  for (int n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng());
    ASSERT_EQ(base64_decode(base64_encode(b)), b) << n;
  }
}

TEST(Base64, RejectsMalformed) {
  EXPECT_THROW(base64_decode("Zm9"), ParseError);
  EXPECT_THROW(base64_decode("Zm9v!A=="), ParseError);
  EXPECT_THROW(base64_decode("Z==="), ParseError);
}

TEST(Messages, ClientRoundTrip) {
  StartTrial st;
  st.mode = Mode::k2D;
  st.start_distance = 0.6;
  st.seed = 1234567890123ull;
  st.radius = 0.063;
  st.t = 2.5;
  const std::vector<ClientMessage> messages = {
      Hello{1, Mode::k3D}, Hello{}, Pos{0.125, {0.1f, -0.2f, 0.3f}}, st, StartTrial{},
      Abort{}, End{3.0}, End{},
  };
  for (const auto& m : messages) EXPECT_EQ(decode_client(encode(m)), m) << encode(m);
}

TEST(Messages, ServerRoundTrip) {
  const std::vector<ServerMessage> messages = {
      Welcome{1, "s1-1", 48000, 256, Mode::k2D},
      make_audio(17, 48000, std::vector<float>{0.0f, 0.5f, -0.25f, 1.0f, -1.0f}),
      Event{{EarconKind::kTriad, 1.5}},
      TrialStarted{2, 0.5, Mode::k3D, {0.4f, 0.4f, -0.4f}, 0.063, 9},
      TrialResult{2, TrialOutcome::kHit, 0.5, 7.5, 7.0, 1.3, 12},
      Error{"bad", true},
  };
  for (const auto& m : messages) EXPECT_EQ(decode_server(encode(m)), m) << encode(m);
}

TEST(Messages, AudioWireFormat) {
  const Audio a = make_audio(3, 48000, std::vector<float>{0.5f, -1.0f});
  EXPECT_EQ(a.samples, (std::vector<std::int16_t>{16384, -32768}));
  const auto j = nlohmann::json::parse(encode(ServerMessage{a}));
  EXPECT_EQ(j["type"], "audio");
  EXPECT_EQ(j["seq"], 3);
  EXPECT_EQ(j["format"], "pcm16le");
  EXPECT_EQ(j["rate"], 48000);
  // 0x4000, 0x8000 little endian.
  EXPECT_EQ(j["data"], base64_encode(std::vector<std::uint8_t>{0x00, 0x40, 0x00, 0x80}));
  EXPECT_EQ(encode(ServerMessage{a}).find('\n'), std::string::npos);
}

TEST(Messages, PosWithoutZIsPlanar) {
  const auto m = decode_client(R"({"type":"pos","t":1,"x":0.25,"y":-0.5})");
  EXPECT_EQ(std::get<Pos>(m), (Pos{1.0, {0.25f, -0.5f, 0.0f}}));
}

TEST(Messages, MalformedInputThrowsParseError) {
  for (const char* line : {
           "not json",
           "[1,2]",
           R"({"no_type":1})",
           R"({"type":"warp"})",
           R"({"type":"pos","t":1,"x":0})",
           R"({"type":"pos","t":"soon","x":0,"y":0})",
           R"({"type":"hello","version":"one"})",
           R"({"type":"hello","version":1,"mode":"4d"})",
           R"({"type":"start_trial","seed":-1})",
       }) {
    EXPECT_THROW(decode_client(line), ParseError) << line;
  }
  EXPECT_THROW(decode_server(R"({"type":"audio","seq":0,"rate":48000,"format":"mp3","data":""})"),
               ParseError);
}

TEST(Messages, TrialResultFromRecord) {
  TrialRecord r;
  r.trial = 4;
  r.outcome = TrialOutcome::kTimeout;
  r.start_time = 1.0;
  r.end_time = 3.0;
  r.time_to_target = 2.0;
  r.path_length = 0.7;
  r.steps = 8;
  EXPECT_EQ(make_trial_result(r), (TrialResult{4, TrialOutcome::kTimeout, 1.0, 3.0, 2.0, 0.7, 8}));
}

}  // namespace
}  // namespace sonicguide::protocol
