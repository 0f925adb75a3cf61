#ifndef SONICGUIDE_EARCONS_H_
#define SONICGUIDE_EARCONS_H_

#include <array>
#include <string_view>
#include <vector>

#include "sonicguide/mapping.h"
#include "sonicguide/synth.h"

namespace sonicguide {

enum class EarconKind { kClick, kTriad, kZoneEnter, kZoneExit };

std::string_view to_string(EarconKind kind);
EarconKind parse_earcon_kind(std::string_view text);

struct EarconEvent {
  EarconKind kind = EarconKind::kClick;
  double time = 0.0;  // seconds from stream start

  bool operator==(const EarconEvent&) const = default;
};

// Plane-crossing debounce. An axis arms once |coordinate| exceeds the
// hysteresis and disarms when it fires.
struct CrossingState {
  bool armed_y = false;
  bool armed_z = false;
  int last_sign_y = 0;  // -1, +1, or 0 before the coordinate left zero
  int last_sign_z = 0;
  bool in_zone = false;

  bool operator==(const CrossingState&) const = default;
};

CrossingState init_crossing_state(const DisplacementVector& first,
                                  const MappingConfig& cfg);

// Allocation-free result of one detection step; at most one event per kind.
struct EventSet {
  std::array<EarconKind, 4> kinds{};
  int count = 0;

  void push(EarconKind kind) { kinds[count++] = kind; }
};

// Click on crossing the x-y plane (z sign flip), triad on crossing the x-z
// plane (y sign flip), zone events on entering/leaving the target zone. In 2D
// mode z is locked at zero and the click binds to the y crossing instead.
EventSet detect_crossings(const DisplacementVector& next, CrossingState& state,
                          const MappingConfig& cfg, Mode mode = Mode::k3D);

// List form; all events carry `time`. `prev` is accepted for symmetry with
// trajectory scanners but the decision depends only on `state` and `next`.
std::vector<EarconEvent> detect_events(const DisplacementVector& prev,
                                       const DisplacementVector& next,
                                       CrossingState& state, const MappingConfig& cfg,
                                       Mode mode = Mode::k3D, double time = 0.0);

// Click: 3 ms raised-cosine windowed noise burst at -6 dBFS peak.
// Triad: C5-E5-G5 sines, 180 ms exponential decay, -9 dBFS peak.
// Zone events have no waveform and return an empty block.
AudioBlock render_earcon(EarconKind kind, const SynthConfig& cfg);

inline constexpr double kClickSeconds = 0.003;
inline constexpr double kTriadSeconds = 0.180;
inline constexpr std::array<double, 3> kTriadFrequencies = {523.25, 659.26, 783.99};

}  // namespace sonicguide

#endif  // SONICGUIDE_EARCONS_H_
