#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sonicguide/error.h"
#include "sonicguide/session.h"
#include "test_util.h"

namespace sonicguide {
namespace {

double norm(const DisplacementVector& d) {
  return std::sqrt(double(d.x) * d.x + double(d.y) * d.y + double(d.z) * d.z);
}

struct Capture {
  std::vector<float> audio;
  std::int64_t next_seq = 0;
  bool gap = false;

  Session::AudioSink sink() {
    return [this](std::int64_t seq, double, std::span<const float> block) {
      gap |= seq != next_seq;
      next_seq = seq + 1;
      audio.insert(audio.end(), block.begin(), block.end());
    };
  }
};

TEST(StartOffset, DeterministicAndOnTheSphere) {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const DisplacementVector a = sample_start_offset(Mode::k3D, 0.8, seed);
    ASSERT_EQ(a, sample_start_offset(Mode::k3D, 0.8, seed));
    ASSERT_NEAR(norm(a), 0.8, 1e-9) << seed;
    const DisplacementVector b = sample_start_offset(Mode::k2D, 0.8, seed);
    ASSERT_EQ(b.z, 0.0f);
    ASSERT_NEAR(norm(b), 0.8, 1e-9) << seed;
  }
  EXPECT_NE(sample_start_offset(Mode::k3D, 0.8, 1), sample_start_offset(Mode::k3D, 0.8, 2));
  EXPECT_EQ(sample_start_offset(Mode::k3D, 0.0, 5), DisplacementVector{});
  EXPECT_THROW(sample_start_offset(Mode::k3D, -1.0, 0), ValidationError);
}

TEST(StartOffset, DirectionsCoverTheSphere) {
  // Uniform on the sphere: each coordinate has mean 0 and mean square r^2/3.
  double sx = 0, sz = 0, sxx = 0, szz = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const DisplacementVector d = sample_start_offset(Mode::k3D, 1.0, 1000 + i);
    sx += d.x, sz += d.z, sxx += d.x * d.x, szz += d.z * d.z;
  }
  EXPECT_NEAR(sx / n, 0.0, 0.05);
  EXPECT_NEAR(sz / n, 0.0, 0.05);
  EXPECT_NEAR(sxx / n, 1.0 / 3.0, 0.03);
  EXPECT_NEAR(szz / n, 1.0 / 3.0, 0.03);
}

TEST(Session, StartTrialPlacesOperatorAndRejectsSecondTrial) {
  SessionConfig cfg;
  cfg.target = {0.1f, -0.2f, 0.0f};
  Session s(cfg);
  TrialSpec spec;
  spec.seed = 42;
  const TrialDescriptor d = s.start_trial(spec);
  EXPECT_EQ(d.trial, 1);
  EXPECT_EQ(d.t, 0.0);
  EXPECT_NEAR(std::hypot(d.start.x - 0.1, d.start.y + 0.2, d.start.z), 0.8, 1e-6);
  EXPECT_TRUE(s.trial_active());
  EXPECT_THROW(s.start_trial(spec), ConflictError);
  EXPECT_TRUE(s.trial_active());
  EXPECT_EQ(s.trials().size(), 0u);
}

TEST(Session, TwoDimensionalTrialStartsInPlane) {
  Session s({});
  TrialSpec spec;
  spec.mode = Mode::k2D;
  spec.seed = 3;
  const TrialDescriptor d = s.start_trial(spec);
  EXPECT_EQ(d.mode, Mode::k2D);
  EXPECT_EQ(d.start.z, 0.0f);
  EXPECT_EQ(s.mode(), Mode::k2D);
  ASSERT_TRUE(s.update_position(0.1, {0.5f, 0.0f, 0.9f}).accepted);
  s.abort_trial();
  EXPECT_EQ(s.trials().back().path.samples.back().d.z, 0.0f);
}

TEST(Session, DwellInZoneEndsTrialWithHit) {
  Session s({});
  TrialSpec spec;
  spec.seed = 1;
  s.start_trial(spec);
  EXPECT_TRUE(s.update_position(1.0, {0.02f, 0.0f, 0.0f}).accepted);
  EXPECT_FALSE(s.update_position(1.2, {0.01f, 0.0f, 0.0f}).finished);
  // Leaving the zone resets the dwell clock.
  EXPECT_FALSE(s.update_position(1.3, {0.2f, 0.0f, 0.0f}).finished);
  EXPECT_FALSE(s.update_position(1.5, {0.0f, 0.0f, 0.0f}).finished);
  EXPECT_FALSE(s.update_position(1.875, {0.0f, 0.01f, 0.0f}).finished);
  const UpdateResult r = s.update_position(2.0, {0.0f, 0.01f, 0.0f});
  ASSERT_TRUE(r.finished);
  EXPECT_EQ(r.finished->outcome, TrialOutcome::kHit);
  EXPECT_EQ(r.finished->time_to_target, 2.0);
  EXPECT_EQ(r.finished->steps, 5);  // the repeated position is not a step
  EXPECT_FALSE(s.trial_active());
}

TEST(Session, TimeoutEndsTrial) {
  SessionConfig cfg;
  cfg.trial_timeout = 2.0;
  Session s(cfg);
  s.start_trial({});
  EXPECT_FALSE(s.update_position(1.0, {0.5f, 0.0f, 0.0f}).finished);
  const UpdateResult r = s.update_position(2.0, {0.4f, 0.0f, 0.0f});
  ASSERT_TRUE(r.finished);
  EXPECT_EQ(r.finished->outcome, TrialOutcome::kTimeout);
}

TEST(Session, RejectedUpdatesLeaveStateUnchanged) {
  Capture cap;
  Session s({}, cap.sink());
  s.start_trial({});
  ASSERT_TRUE(s.update_position(1.0, {0.5f, 0.0f, 0.0f}).accepted);
  const auto blocks = s.blocks_rendered();
  const auto audio = cap.audio.size();
  for (double t : {1.0, 0.5, double(NAN)}) {
    const UpdateResult r = s.update_position(t, {0.1f, 0.0f, 0.0f});
    EXPECT_FALSE(r.accepted);
    EXPECT_FALSE(r.reason.empty());
  }
  EXPECT_FALSE(s.update_position(2.0, {NAN, 0.0f, 0.0f}).accepted);
  EXPECT_EQ(s.update_position(0.5, {}).reason, "stale timestamp");
  EXPECT_EQ(s.blocks_rendered(), blocks);
  EXPECT_EQ(cap.audio.size(), audio);
  EXPECT_EQ(*s.last_time(), 1.0);
  s.abort_trial();
  EXPECT_EQ(s.trials().back().path.samples.size(), 2u);
}

TEST(Session, PositionsWithoutTrialAreAccepted) {
  Capture cap;
  Session s({}, cap.sink());
  EXPECT_TRUE(s.update_position(0.0, {0.3f, 0.0f, 0.0f}).accepted);
  EXPECT_TRUE(s.update_position(0.5, {0.3f, 0.0f, 0.0f}).accepted);
  EXPECT_EQ(cap.audio.size(), 23808u);  // 93 blocks end by 0.5 s
  EXPECT_TRUE(s.trials().empty());
}

TEST(Session, ClickReachesEventsLogAndAudio) {
  const auto dir = testing::temp_dir("session_click");
  auto log = std::make_shared<SessionLogWriter>(dir / "s.jsonl");
  Capture cap;
  Session s({}, cap.sink(), log);
  std::vector<EarconEvent> seen;
  s.set_event_sink([&](const EarconEvent& e) { seen.push_back(e); });
  s.update_position(0.0, {0.5f, 0.3f, 0.3f});
  s.update_position(1.0, {0.5f, 0.3f, -0.3f});
  const auto tail = s.finish(1.5);
  EXPECT_TRUE(tail.empty());
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].kind, EarconKind::kClick);

  const auto records = read_session_log(dir / "s.jsonl");
  int clicks = 0;
  for (const auto& r : records)
    if (const auto* e = std::get_if<EventRecord>(&r)) clicks += e->event == seen[0];
  EXPECT_EQ(clicks, 1);

  // The click burst sits on top of the tone at the event time.
  const auto at = static_cast<std::size_t>(std::llround(seen[0].time * 48000.0));
  const std::span<const float> audio(cap.audio);
  EXPECT_GT(testing::max_step(audio.subspan(at, 144)), 5.0 * testing::max_step(audio.subspan(at - 4800, 4800)));
  EXPECT_EQ(cap.audio.size(), 72000u);
  EXPECT_FALSE(cap.gap);
}

// Random walks: every accepted position is logged exactly once, a hit always
// ends inside the zone, and the log replays to the same audio offline.
TEST(Session, RandomWalkProperties) {
  const auto dir = testing::temp_dir("session_walk");
  auto log = std::make_shared<SessionLogWriter>(dir / "s.jsonl");
  Capture cap;
  SessionConfig cfg;
  cfg.target = {0.05f, 0.0f, -0.1f};
  cfg.trial_timeout = 6.0;
  Session s(cfg, cap.sink(), log);
  std::mt19937 rng(17);
  std::normal_distribution<double> step(0.0, 0.01);
  std::uniform_real_distribution<double> dt(0.005, 0.05);
  std::vector<PosRecord> accepted;
  double t = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    TrialSpec spec;
    spec.seed = trial;
    spec.start_distance = trial % 2 ? 0.1 : 0.3;
    const TrialDescriptor d = s.start_trial(spec);
    accepted.push_back({d.t, d.start});
    t = d.t;
    DisplacementVector p = d.start;
    while (s.trial_active()) {
      t += dt(rng);
      // Drift toward the target so some walks finish with hits.
      p = make_displacement(p.x + 0.3 * (cfg.target.x - p.x) + step(rng),
                            p.y + 0.3 * (cfg.target.y - p.y) + step(rng),
                            p.z + 0.3 * (cfg.target.z - p.z) + step(rng));
      if (s.update_position(t, p).accepted) accepted.push_back({t, p});
      // Occasionally resend a stale timestamp.
      if (rng() % 7 == 0) EXPECT_FALSE(s.update_position(t - 0.001, {}).accepted);
    }
  }
  s.finish(t + 0.25);
  log->flush();

  int hits = 0;
  for (const TrialRecord& r : s.trials()) {
    const DisplacementVector last = r.path.samples.back().d;
    const DisplacementVector rel = make_displacement(last.x - cfg.target.x, last.y - cfg.target.y,
                                                     last.z - cfg.target.z);
    if (r.outcome == TrialOutcome::kHit) {
      ++hits;
      EXPECT_TRUE(in_target_zone(rel, cfg.mapping));
    }
  }
  EXPECT_GT(hits, 0);

  const auto records = read_session_log(dir / "s.jsonl");
  std::vector<PosRecord> logged;
  int starts = 0, ends = 0;
  for (const auto& r : records) {
    if (const auto* p = std::get_if<PosRecord>(&r)) logged.push_back(*p);
    starts += std::holds_alternative<TrialStartRecord>(r);
    ends += std::holds_alternative<TrialEndRecord>(r);
  }
  EXPECT_EQ(logged, accepted);
  EXPECT_EQ(starts, 6);
  EXPECT_EQ(ends, 6);

  const Trajectory replay = positions_from_log(records, Mode::k3D, cfg.target);
  const auto offline = render_stream(replay.samples, cfg.synth, cfg.mapping, Mode::k3D, t + 0.25);
  EXPECT_EQ(offline.audio.frames, cap.audio);
  EXPECT_FALSE(cap.gap);
}

TEST(Session, FinishAbortsActiveTrialAndClosesStream) {
  Session s({});
  s.start_trial({});
  s.update_position(0.5, {0.5f, 0.0f, 0.0f});
  s.finish(1.0);
  ASSERT_EQ(s.trials().size(), 1u);
  EXPECT_EQ(s.trials()[0].outcome, TrialOutcome::kAbort);
  EXPECT_EQ(s.update_position(2.0, {}).reason, "session finished");
  EXPECT_THROW(s.start_trial({}), ValidationError);
}

TEST(SessionConfig, Validation) {
  SessionConfig cfg;
  cfg.dwell_time = -1.0;
  EXPECT_THROW(Session{cfg}, ValidationError);
  cfg = {};
  cfg.trial_timeout = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  Session s({});
  TrialSpec spec;
  spec.target_radius = -0.1;
  EXPECT_THROW(s.start_trial(spec), ValidationError);
  EXPECT_FALSE(s.trial_active());
}

}  // namespace
}  // namespace sonicguide
