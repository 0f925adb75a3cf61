#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sonicguide/error.h"
#include "sonicguide/stream.h"
#include "test_util.h"

namespace sonicguide {
namespace {

std::vector<TrajectorySample> crossing_path() {
  return read_trajectory_file(SG_FIXTURES "/earcon_crossings.csv").samples;
}

TEST(RenderStream, LengthFollowsDuration) {
  const std::vector<TrajectorySample> s = {{0.0, {0.3f, 0.0f, 0.0f}}, {1.0, {0.2f, 0.0f, 0.0f}}};
  EXPECT_EQ(render_stream(s, {}, {}).audio.frames.size(), 48000u);
  EXPECT_EQ(render_stream(s, {}, {}, Mode::k3D, 2.5).audio.frames.size(), 120000u);
  EXPECT_EQ(render_stream(s, {}, {}, Mode::k3D, 0.01).audio.frames.size(), 480u);
  EXPECT_THROW(render_stream({}, {}, {}), ValidationError);
}

TEST(RenderStream, EarconFixtureEventsAtBlockStartsNearCrossings) {
  const SynthConfig s;
  const auto r = render_stream(crossing_path(), s, {});
  std::vector<double> clicks, triads;
  const double block = s.block_size / s.sample_rate;
  for (const auto& e : r.events) {
    const double blocks = e.time / block;
    EXPECT_NEAR(blocks, std::round(blocks), 1e-9);
    if (e.kind == EarconKind::kClick) clicks.push_back(e.time);
    if (e.kind == EarconKind::kTriad) triads.push_back(e.time);
  }
  // Linear interpolation of the fixture: z changes sign at 0.5, 2.5 and
  // 3 + 0.5 * 0.3 / 0.31; y at 1.5 and 5.0. The dithering around z = 0
  // between 3.5 and 6.5 stays inside the hysteresis band.
  const std::vector<double> z_cross = {0.5, 2.5, 3.0 + 0.5 * 0.3 / 0.31};
  const std::vector<double> y_cross = {1.5, 5.0};
  ASSERT_EQ(clicks.size(), z_cross.size());
  ASSERT_EQ(triads.size(), y_cross.size());
  // Detection waits until the coordinate is past the hysteresis on the far
  // side, then up to one block for the next block start.
  for (std::size_t i = 0; i < clicks.size(); ++i) EXPECT_NEAR(clicks[i], z_cross[i], block + 0.01);
  for (std::size_t i = 0; i < triads.size(); ++i) EXPECT_NEAR(triads[i], y_cross[i], block + 0.01);
}

TEST(RenderStream, AxisSweepDemoEvents) {
  const auto demo = read_trajectory_file(SG_FIXTURES "/axis_sweep_demo.csv").samples;
  std::vector<EarconKind> kinds;
  for (const auto& e : render_stream(demo, {}, {}).events) kinds.push_back(e.kind);
  EXPECT_EQ(kinds, (std::vector<EarconKind>{EarconKind::kClick, EarconKind::kTriad, EarconKind::kZoneEnter}));
}

TEST(RenderStream, EarconAudioAppearsAtEventTime) {
  const SynthConfig s;
  const auto with = render_stream(crossing_path(), s, {});
  const auto without = render_stream(crossing_path(), s, {}, Mode::k3D, std::nullopt, false);
  EXPECT_EQ(with.events, without.events);
  const auto click = render_earcon(EarconKind::kClick, s).frames;
  const std::size_t at = static_cast<std::size_t>(std::llround(with.events[0].time * s.sample_rate));
  for (std::size_t i = 0; i < at; ++i) ASSERT_EQ(with.audio.frames[i], without.audio.frames[i]);
  double diff = 0.0;
  for (std::size_t i = 0; i < click.size(); ++i)
    diff = std::max(diff, std::abs(double(with.audio.frames[at + i]) - without.audio.frames[at + i]));
  EXPECT_NEAR(diff, testing::max_abs(click), 0.05);
}

TEST(StreamRenderer, IncrementalPushesMatchOfflineRender) {
  const SynthConfig s;
  const auto path = crossing_path();
  const auto offline = render_stream(path, s, {});

  StreamRenderer r(s, {});
  std::vector<float> audio, block(s.block_size);
  std::vector<EarconEvent> events;
  EventSet ev;
  const auto drain = [&] {
    while (true) {
      const double t = r.next_block_time();
      const std::size_t n = r.render_next(block, ev);
      if (n == 0) return;
      audio.insert(audio.end(), block.begin(), block.begin() + n);
      for (int i = 0; i < ev.count; ++i) events.push_back({ev.kinds[i], t});
    }
  };
  for (const auto& p : path) {
    r.push(p.t, p.d);
    drain();
    // Every block that ends by the newest position is out, and no other.
    EXPECT_LE(r.next_block_time(), p.t);
    EXPECT_GT(r.next_block_time() + s.block_size / s.sample_rate, p.t);
  }
  r.finish(path.back().t);
  drain();
  EXPECT_EQ(audio, offline.audio.frames);
  EXPECT_EQ(events, offline.events);
}

TEST(StreamRenderer, RejectsBadPushes) {
  StreamRenderer r({}, {});
  r.push(0.5, {});
  EXPECT_THROW(r.push(0.5, {}), ValidationError);
  EXPECT_THROW(r.push(0.4, {}), ValidationError);
  EXPECT_THROW(r.push(1.0, {NAN, 0.0f, 0.0f}), ValidationError);
  r.finish(1.0);
  EXPECT_TRUE(r.finished());
  EXPECT_THROW(r.push(2.0, {}), ValidationError);
}

TEST(StreamRenderer, TwoDimensionalDropsZ) {
  const std::vector<TrajectorySample> flat = {{0.0, {0.3f, 0.2f, 0.0f}}, {0.5, {0.3f, 0.2f, 0.0f}}};
  const std::vector<TrajectorySample> tilted = {{0.0, {0.3f, 0.2f, 0.7f}},
                                                {0.5, {0.3f, 0.2f, -0.7f}}};
  EXPECT_EQ(render_stream(flat, {}, {}, Mode::k2D).audio.frames,
            render_stream(tilted, {}, {}, Mode::k2D).audio.frames);
}

TEST(StreamRenderer, FinishInsideRenderedAudioKeepsIt) {
  StreamRenderer r({}, {});
  r.push(0.0, {});
  r.push(1.0, {});
  std::vector<float> block(256);
  EventSet ev;
  std::size_t total = 0;
  while (const std::size_t n = r.render_next(block, ev)) total += n;
  EXPECT_EQ(total, 187u * 256u);
  r.finish(0.5);
  EXPECT_EQ(r.render_next(block, ev), 0u);
}

TEST(StreamRenderer, FinishWithoutPositionsHoldsOrigin) {
  StreamRenderer r({}, {});
  r.finish(0.1);
  std::vector<float> block(256);
  EventSet ev;
  std::size_t total = 0;
  while (const std::size_t n = r.render_next(block, ev)) total += n;
  EXPECT_EQ(total, 4800u);
}

// Sweeping through both sign changes must not produce a larger sample step
// than the steady sounds along the same path.
TEST(Continuity, CrossingYAndZPlanesIsSmooth) {
  const SynthConfig s;
  const MappingConfig m;
  const DisplacementVector a{0.5f, -0.5f, -0.5f}, b{0.5f, 0.5f, 0.5f};
  const std::vector<TrajectorySample> path = {{0.0, a}, {4.0, b}};
  const auto swept = render_stream(path, s, m, Mode::k3D, std::nullopt, false);
  double steady = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const DisplacementVector d = position_at(path, 4.0 * i / 20.0);
    const AudioBlock st = render_steady(map_position(d, m), 0.5, s, m);
    steady = std::max(steady, testing::max_step(st.frames));
  }
  EXPECT_LE(testing::max_step(swept.audio.frames), 1.1 * steady);
}

}  // namespace
}  // namespace sonicguide
