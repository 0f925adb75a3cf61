#include "sonicguide/mapping.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

bool in_unit_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

// Magnitude u in [0, 1] to range fraction, and back.
double shape(double u, const MappingConfig& cfg) {
  if (cfg.scaling == Scaling::kLinear) return u;
  return std::expm1(cfg.curvature * u) / std::expm1(cfg.curvature);
}

double unshape(double f, const MappingConfig& cfg) {
  if (cfg.scaling == Scaling::kLinear) return f;
  return std::log1p(f * std::expm1(cfg.curvature)) / cfg.curvature;
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::k2D ? "2d" : "3d"; }

std::string_view to_string(Scaling scaling) {
  return scaling == Scaling::kLinear ? "linear" : "exponential";
}

Scaling parse_scaling(std::string_view text) {
  if (text == "linear") return Scaling::kLinear;
  if (text == "exponential") return Scaling::kExponential;
  throw ValidationError("scaling must be linear or exponential, got '" + std::string(text) + "'");
}

Mode parse_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "2d") return Mode::k2D;
  if (lower == "3d") return Mode::k3D;
  throw ValidationError("mode must be 2d or 3d, got '" + std::string(text) + "'");
}

bool DisplacementVector::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

double DisplacementVector::norm() const {
  const double dx = x, dy = y, dz = z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

DisplacementVector make_displacement(double x, double y, double z) {
  require(std::isfinite(x) && std::isfinite(y) && std::isfinite(z),
          "displacement components must be finite");
  DisplacementVector d{static_cast<float>(x), static_cast<float>(y),
                       static_cast<float>(z)};
  require(d.finite(), "displacement component overflows single precision");
  return d;
}

void validate(const SonificationParams& p) {
  require(std::isfinite(p.chroma_velocity), "chroma_velocity must be finite");
  require(std::isfinite(p.beat_rate) && p.beat_rate >= 0.0,
          "beat_rate must be finite and >= 0");
  require(in_unit_range(p.beat_depth), "beat_depth must lie in [0, 1]");
  require(in_unit_range(p.roughness_depth), "roughness_depth must lie in [0, 1]");
  require(in_unit_range(p.brightness), "brightness must lie in [0, 1]");
  require(in_unit_range(p.fullness), "fullness must lie in [0, 1]");
  require(in_unit_range(p.noise_gain), "noise_gain must lie in [0, 1]");
  require(!((p.beat_rate > 0.0 || p.beat_depth > 0.0) && p.roughness_depth > 0.0),
          "beats and roughness are mutually exclusive");
  require(!(p.brightness > 0.0 && p.fullness > 0.0),
          "brightness and fullness are mutually exclusive");
}

void MappingConfig::validate() const {
  for (double v : {v_max, beat_rate_max, beat_depth_ramp, roughness_rate,
                   roughness_depth_max, brightness_octave_shift_max,
                   fullness_bandwidth_max, target_radius, hysteresis}) {
    require(std::isfinite(v) && v > 0.0, "mapping constants must be positive");
  }
  require(roughness_depth_max <= 1.0, "roughness_depth_max must be <= 1");
  require(in_unit_range(noise_gain_in_zone), "noise_gain_in_zone must lie in [0, 1]");
  require(hysteresis < target_radius, "hysteresis must be smaller than target_radius");
  require(std::isfinite(curvature) && curvature > 0.0, "curvature must be positive");
}

SonificationParams map_position(const DisplacementVector& d, const MappingConfig& cfg) {
  require(d.finite(), "displacement components must be finite");
  const double x = std::clamp(static_cast<double>(d.x), -1.0, 1.0);
  const double y = std::clamp(static_cast<double>(d.y), -1.0, 1.0);
  const double z = std::clamp(static_cast<double>(d.z), -1.0, 1.0);

  SonificationParams p;
  // 0 - v keeps the neutral value at +0.0.
  p.chroma_velocity = 0.0 - cfg.v_max * std::copysign(shape(std::abs(x), cfg), x);
  if (y > 0.0) {
    p.roughness_depth = cfg.roughness_depth_max * shape(y, cfg);
  } else if (y < 0.0) {
    p.beat_rate = cfg.beat_rate_max * shape(-y, cfg);
    p.beat_depth = std::min(1.0, -y / cfg.beat_depth_ramp);
  }
  if (z > 0.0) {
    p.brightness = shape(z, cfg);
  } else if (z < 0.0) {
    p.fullness = shape(-z, cfg);
  }
  p.noise_gain = in_target_zone(d, cfg) ? cfg.noise_gain_in_zone : 0.0;
  return p;
}

DisplacementVector invert_params(const SonificationParams& p, const MappingConfig& cfg) {
  validate(p);
  constexpr double kSlack = 1.0 + 1e-12;
  require(std::abs(p.chroma_velocity) <= cfg.v_max * kSlack,
          "chroma_velocity exceeds v_max");
  require(p.beat_rate <= cfg.beat_rate_max * kSlack, "beat_rate exceeds beat_rate_max");
  require(p.roughness_depth <= cfg.roughness_depth_max * kSlack,
          "roughness_depth exceeds roughness_depth_max");

  DisplacementVector d;
  const double vx = (0.0 - p.chroma_velocity) / cfg.v_max;
  d.x = static_cast<float>(std::copysign(unshape(std::abs(vx), cfg), vx));
  if (p.beat_rate > 0.0) {
    d.y = static_cast<float>(-unshape(p.beat_rate / cfg.beat_rate_max, cfg));
  } else if (p.beat_depth > 0.0) {
    d.y = static_cast<float>(-p.beat_depth * cfg.beat_depth_ramp);
  } else if (p.roughness_depth > 0.0) {
    d.y = static_cast<float>(unshape(p.roughness_depth / cfg.roughness_depth_max, cfg));
  }
  if (p.brightness > 0.0) {
    d.z = static_cast<float>(unshape(p.brightness, cfg));
  } else if (p.fullness > 0.0) {
    d.z = static_cast<float>(-unshape(p.fullness, cfg));
  }
  return d;
}

bool in_target_zone(const DisplacementVector& d, const MappingConfig& cfg) {
  return static_cast<float>(d.norm()) <= static_cast<float>(cfg.target_radius);
}

}  // namespace sonicguide
