#ifndef SONICGUIDE_MAPPING_H_
#define SONICGUIDE_MAPPING_H_

#include <string_view>

namespace sonicguide {

enum class Mode { k2D, k3D };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);  // "2d" | "3d", case-insensitive

// Operator position relative to the target, in fractions of the workspace
// half-extent. The origin means the operator sits on the target.
//
// Components are single precision on purpose: the parameter frame is computed
// in double, and the extra guard bits are what make invert_params an exact
// inverse of map_position.
struct DisplacementVector {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  bool operator==(const DisplacementVector&) const = default;

  bool finite() const;
  double norm() const;
};

// Throws ValidationError for non-finite components.
DisplacementVector make_displacement(double x, double y, double z);

// One perceptual control frame. The y-halves (beats / roughness) and the
// z-halves (brightness / fullness) are mutually exclusive.
struct SonificationParams {
  double chroma_velocity = 0.0;  // octaves per second, > 0 rises
  double beat_rate = 0.0;        // Hz
  double beat_depth = 0.0;       // [0, 1]
  double roughness_depth = 0.0;  // [0, 1]
  double brightness = 0.0;       // [0, 1]
  double fullness = 0.0;         // [0, 1]
  double noise_gain = 0.0;       // linear

  bool operator==(const SonificationParams&) const = default;
};

// Throws ValidationError on out-of-range or non-exclusive fields.
void validate(const SonificationParams& params);

// How |coordinate| in [0, 1] becomes a fraction of each parameter's range.
// Exponential: (e^(k u) - 1) / (e^k - 1) with k = curvature, which spends more
// of the range far from the target.
enum class Scaling { kLinear, kExponential };

std::string_view to_string(Scaling scaling);
Scaling parse_scaling(std::string_view text);  // "linear" | "exponential"

struct MappingConfig {
  double v_max = 1.5;                        // octaves per second at |x| = 1
  double beat_rate_max = 8.0;                // Hz at y = -1
  double beat_depth_ramp = 0.05;             // |y| at which beats reach full depth
  double roughness_rate = 70.0;              // Hz, fixed modulator for y > 0
  double roughness_depth_max = 0.9;          // depth at y = +1
  double brightness_octave_shift_max = 2.0;  // envelope shift at z = +1
  double fullness_bandwidth_max = 2.5;       // extra half-width at z = -1
  double target_radius = 0.05;
  double hysteresis = 0.02;
  double noise_gain_in_zone = 0.03;
  Scaling scaling = Scaling::kLinear;
  double curvature = 3.0;  // exponential scaling only

  void validate() const;
};

// Pure and thread-safe. Coordinates are clamped to [-1, 1]; non-finite input
// throws ValidationError.
SonificationParams map_position(const DisplacementVector& d,
                                const MappingConfig& cfg);

// Exact inverse of map_position on [-1, 1]^3 (noise_gain is ignored). Beat
// displacement is recovered from beat_rate, including inside the depth ramp.
// With exponential scaling the inverse is exact up to the last float bit.
DisplacementVector invert_params(const SonificationParams& params,
                                 const MappingConfig& cfg);

// Closed L2 ball of radius cfg.target_radius, evaluated at position precision.
bool in_target_zone(const DisplacementVector& d, const MappingConfig& cfg);

}  // namespace sonicguide

#endif  // SONICGUIDE_MAPPING_H_
