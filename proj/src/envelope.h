#ifndef SONICGUIDE_SRC_ENVELOPE_H_
#define SONICGUIDE_SRC_ENVELOPE_H_

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sonicguide::detail {

// sin^2 fade over the bottom and top octave of the bank so that partials
// appear and vanish at zero amplitude when the chroma phase wraps.
inline double bank_taper(double position, int count) {
  const double edge = std::min(position, static_cast<double>(count) - position);
  if (edge >= 1.0) return 1.0;
  if (edge <= 0.0) return 0.0;
  const double s = std::sin(0.5 * std::numbers::pi * edge);
  return s * s;
}

// Amplitude of the partial at bank position `position` (octaves above the
// base) and frequency `freq`. `u` is its distance in octaves from the
// envelope center. Partials fade out between 0.40 and 0.45 of the sample rate.
inline double partial_gain(double u, double half_width, double position, int count,
                           double freq, double sample_rate) {
  const double alias_lo = 0.40 * sample_rate;
  const double alias_hi = 0.45 * sample_rate;
  if (!(std::abs(u) < half_width) || !(freq < alias_hi)) return 0.0;
  double amp = 0.5 * (1.0 + std::cos(std::numbers::pi * u / half_width));
  amp *= bank_taper(position, count);
  if (freq > alias_lo)
    amp *= 0.5 * (1.0 + std::cos(std::numbers::pi * (freq - alias_lo) / (alias_hi - alias_lo)));
  return amp;
}

}  // namespace sonicguide::detail

#endif  // SONICGUIDE_SRC_ENVELOPE_H_
