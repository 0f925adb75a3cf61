#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sonicguide/earcons.h"
#include "sonicguide/error.h"
#include "test_util.h"

namespace sonicguide {
namespace {

std::vector<EarconKind> run(const std::vector<DisplacementVector>& path, Mode mode = Mode::k3D) {
  const MappingConfig cfg;
  CrossingState state = init_crossing_state(path.front(), cfg);
  std::vector<EarconKind> out;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const EventSet e = detect_crossings(path[i], state, cfg, mode);
    for (int k = 0; k < e.count; ++k) out.push_back(e.kinds[k]);
  }
  return out;
}

TEST(Crossings, ZFlipBeyondHysteresisClicks) {
  const auto e = run({{0.5f, 0.3f, 0.1f}, {0.5f, 0.3f, 0.05f}, {0.5f, 0.3f, -0.05f}});
  EXPECT_EQ(e, std::vector<EarconKind>{EarconKind::kClick});
}

TEST(Crossings, YFlipGivesTriad) {
  const auto e = run({{0.5f, -0.3f, 0.1f}, {0.5f, 0.3f, 0.1f}});
  EXPECT_EQ(e, std::vector<EarconKind>{EarconKind::kTriad});
}

TEST(Crossings, JitterInsideHysteresisIsSilent) {
  std::vector<DisplacementVector> path;
  for (int i = 0; i < 200; ++i) path.push_back({0.5f, 0.3f, (i % 2 ? 0.015f : -0.015f)});
  EXPECT_TRUE(run(path).empty());
}

TEST(Crossings, OneClickPerQualifiedCrossing) {
  // Armed at 0.1, fires on the flip, then jitter around zero stays silent
  // until the coordinate leaves the band again.
  const auto e = run({{0.5f, 0.3f, 0.1f},
                      {0.5f, 0.3f, -0.01f},
                      {0.5f, 0.3f, 0.01f},
                      {0.5f, 0.3f, -0.01f},
                      {0.5f, 0.3f, -0.1f},
                      {0.5f, 0.3f, 0.1f}});
  EXPECT_EQ(e, (std::vector<EarconKind>{EarconKind::kClick, EarconKind::kClick}));
}

TEST(Crossings, SittingOnThePlaneIsNotACrossing) {
  const auto e = run({{0.5f, 0.3f, -0.3f}, {0.5f, 0.3f, 0.0f}, {0.5f, 0.3f, 0.0f}});
  EXPECT_TRUE(e.empty());
}

TEST(Crossings, TwoDimensionalModeBindsClickToY) {
  const auto e = run({{0.5f, 0.3f, 0.0f}, {0.5f, -0.3f, 0.0f}}, Mode::k2D);
  EXPECT_EQ(e, std::vector<EarconKind>{EarconKind::kClick});
}

TEST(Crossings, ZoneEnterAndExit) {
  const auto e = run({{0.3f, 0.0f, 0.0f}, {0.04f, 0.0f, 0.0f}, {0.3f, 0.0f, 0.0f}});
  EXPECT_EQ(e, (std::vector<EarconKind>{EarconKind::kZoneEnter, EarconKind::kZoneExit}));
}

TEST(Crossings, DetectEventsStampsTime) {
  const MappingConfig cfg;
  CrossingState state = init_crossing_state({0.5f, 0.3f, 0.3f}, cfg);
  const auto events =
      detect_events({0.5f, 0.3f, 0.3f}, {0.5f, 0.3f, -0.3f}, state, cfg, Mode::k3D, 1.25);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0], (EarconEvent{EarconKind::kClick, 1.25}));
}

TEST(EarconWaveforms, ClickIsThreeMillisecondsAtMinusSixDb) {
  const SynthConfig s;
  const AudioBlock click = render_earcon(EarconKind::kClick, s);
  EXPECT_EQ(click.frames.size(), 144u);
  EXPECT_NEAR(testing::max_abs(click.frames), std::pow(10.0, -6.0 / 20.0), 1e-6);
  EXPECT_LT(std::abs(click.frames.front()), 0.01);
  EXPECT_LT(std::abs(click.frames.back()), 0.01);
  EXPECT_EQ(click.frames, render_earcon(EarconKind::kClick, s).frames);
}

TEST(EarconWaveforms, TriadHasThreeNotesAndDecays) {
  const SynthConfig s;
  const AudioBlock triad = render_earcon(EarconKind::kTriad, s);
  EXPECT_EQ(triad.frames.size(), 8640u);
  EXPECT_NEAR(testing::max_abs(triad.frames), std::pow(10.0, -9.0 / 20.0), 1e-6);
  const std::span<const float> head(triad.frames.data(), 2400);
  for (double f : kTriadFrequencies) {
    EXPECT_GT(testing::tone_amplitude(head, s.sample_rate, f), 0.05) << f;
  }
  EXPECT_LT(testing::tone_amplitude(head, s.sample_rate, 587.33), 0.01);
  const std::span<const float> end(triad.frames.data() + 8640 - 480, 480);
  EXPECT_LT(testing::max_abs(end), 0.01 * testing::max_abs(triad.frames) + 1e-3);
}

TEST(EarconWaveforms, TriadSpectralPeaksSitOnTheNotes) {
  const SynthConfig s;
  const AudioBlock triad = render_earcon(EarconKind::kTriad, s);
  for (double f : kTriadFrequencies) {
    double best_f = 0.0, best = 0.0;
    for (double g = f - 5.0; g <= f + 5.0; g += 0.05) {
      const double a = testing::tone_amplitude(triad.frames, s.sample_rate, g);
      if (a > best) {
        best = a;
        best_f = g;
      }
    }
    EXPECT_NEAR(best_f, f, 1.0);
  }
}

TEST(EarconWaveforms, ZoneEventsAreSilent) {
  EXPECT_TRUE(render_earcon(EarconKind::kZoneEnter, {}).frames.empty());
  EXPECT_TRUE(render_earcon(EarconKind::kZoneExit, {}).frames.empty());
}

TEST(EarconKind, NamesRoundTrip) {
  for (auto k : {EarconKind::kClick, EarconKind::kTriad, EarconKind::kZoneEnter,
                 EarconKind::kZoneExit}) {
    EXPECT_EQ(parse_earcon_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_earcon_kind("bell"), ValidationError);
}

}  // namespace
}  // namespace sonicguide
