#include "sonicguide/earcons.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// True when the coordinate changed side while armed.
bool step_axis(double c, double hysteresis, bool& armed, int& last_sign) {
  if (std::abs(c) > hysteresis) armed = true;
  const int sign = sign_of(c);
  if (sign == 0) return false;  // sitting on the plane is not a crossing yet
  bool fired = false;
  if (last_sign != 0 && sign != last_sign && armed) {
    fired = true;
    armed = false;
  }
  last_sign = sign;
  return fired;
}

void normalize_peak(std::vector<float>& frames, double peak) {
  float max_abs = 0.0f;
  for (float v : frames) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0f) return;
  const float scale = static_cast<float>(peak / max_abs);
  for (float& v : frames) v *= scale;
}

double dbfs(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace

std::string_view to_string(EarconKind kind) {
  switch (kind) {
    case EarconKind::kClick: return "click";
    case EarconKind::kTriad: return "triad";
    case EarconKind::kZoneEnter: return "zone_enter";
    case EarconKind::kZoneExit: return "zone_exit";
  }
  return "click";
}

EarconKind parse_earcon_kind(std::string_view text) {
  if (text == "click") return EarconKind::kClick;
  if (text == "triad") return EarconKind::kTriad;
  if (text == "zone_enter") return EarconKind::kZoneEnter;
  if (text == "zone_exit") return EarconKind::kZoneExit;
  throw ValidationError("unknown earcon kind '" + std::string(text) + "'");
}

CrossingState init_crossing_state(const DisplacementVector& first,
                                  const MappingConfig& cfg) {
  CrossingState state;
  state.armed_y = std::abs(first.y) > cfg.hysteresis;
  state.armed_z = std::abs(first.z) > cfg.hysteresis;
  state.last_sign_y = sign_of(first.y);
  state.last_sign_z = sign_of(first.z);
  state.in_zone = in_target_zone(first, cfg);
  return state;
}

EventSet detect_crossings(const DisplacementVector& next, CrossingState& state,
                          const MappingConfig& cfg, Mode mode) {
  EventSet events;
  if (mode == Mode::k3D) {
    if (step_axis(next.z, cfg.hysteresis, state.armed_z, state.last_sign_z))
      events.push(EarconKind::kClick);
    if (step_axis(next.y, cfg.hysteresis, state.armed_y, state.last_sign_y))
      events.push(EarconKind::kTriad);
  } else {
    if (step_axis(next.y, cfg.hysteresis, state.armed_y, state.last_sign_y))
      events.push(EarconKind::kClick);
  }
  const bool in_zone = in_target_zone(next, cfg);
  if (in_zone != state.in_zone) {
    events.push(in_zone ? EarconKind::kZoneEnter : EarconKind::kZoneExit);
    state.in_zone = in_zone;
  }
  return events;
}

std::vector<EarconEvent> detect_events(const DisplacementVector& /*prev*/,
                                       const DisplacementVector& next,
                                       CrossingState& state, const MappingConfig& cfg,
                                       Mode mode, double time) {
  const EventSet set = detect_crossings(next, state, cfg, mode);
  std::vector<EarconEvent> out;
  out.reserve(set.count);
  for (int i = 0; i < set.count; ++i) out.push_back({set.kinds[i], time});
  return out;
}

AudioBlock render_earcon(EarconKind kind, const SynthConfig& cfg) {
  cfg.validate();
  const double sr = cfg.sample_rate;
  AudioBlock block{sr, {}};
  if (kind == EarconKind::kClick) {
    const auto n = static_cast<std::size_t>(std::lround(kClickSeconds * sr));
    block.frames.resize(n);
    std::mt19937 rng(cfg.noise_seed ^ 0xc11c4u);
    for (std::size_t i = 0; i < n; ++i) {
      const double white = static_cast<double>(rng() >> 8) * (2.0 / 16777216.0) - 1.0;
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (i + 0.5) / n));
      block.frames[i] = static_cast<float>(white * w);
    }
    normalize_peak(block.frames, dbfs(-6.0));
  } else if (kind == EarconKind::kTriad) {
    const auto n = static_cast<std::size_t>(std::lround(kTriadSeconds * sr));
    block.frames.resize(n);
    // -40 dB at the end of the note, short raised-cosine attack and release.
    const double tau = kTriadSeconds / std::log(100.0);
    const double attack = 0.002 * sr;
    const double release = 0.005 * sr;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = i / sr;
      double v = 0.0;
      for (double f : kTriadFrequencies) v += std::sin(2.0 * std::numbers::pi * f * t);
      double env = std::exp(-t / tau);
      if (i < attack) env *= 0.5 * (1.0 - std::cos(std::numbers::pi * i / attack));
      const double to_end = static_cast<double>(n - i);
      if (to_end < release)
        env *= 0.5 * (1.0 - std::cos(std::numbers::pi * to_end / release));
      block.frames[i] = static_cast<float>(v * env);
    }
    normalize_peak(block.frames, dbfs(-9.0));
  }
  return block;
}

}  // namespace sonicguide
