#ifndef SONICGUIDE_TRAJECTORY_H_
#define SONICGUIDE_TRAJECTORY_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sonicguide/mapping.h"

namespace sonicguide {

struct TrajectorySample {
  double t = 0.0;  // seconds
  DisplacementVector d;

  bool operator==(const TrajectorySample&) const = default;
};

// Timestamped path: strictly increasing t, at least one sample, z == 0 in 2D.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  Mode mode = Mode::k3D;

  bool operator==(const Trajectory&) const = default;

  void validate() const;  // throws ValidationError
  double start() const { return samples.front().t; }
  double end() const { return samples.back().t; }
};

// CSV with header `t,x,y,z`; blank lines and lines starting with '#' are
// skipped. Coordinates outside [-1, 1] are kept. Throws ParseError carrying
// the 1-based line number.
Trajectory parse_trajectory(std::string_view text, Mode mode = Mode::k3D);

// Shortest round-trip formatting, so parse(serialize(t)) == t.
std::string serialize_trajectory(const Trajectory& trajectory);

Trajectory read_trajectory_file(const std::filesystem::path& path,
                                Mode mode = Mode::k3D);
void write_trajectory_file(const Trajectory& trajectory,
                           const std::filesystem::path& path);

// Linear interpolation between two samples, evaluated in double.
DisplacementVector interpolate(const TrajectorySample& a, const TrajectorySample& b,
                               double t);

// Piecewise-linear position at time t, endpoints held. Samples must be
// sorted by t and non-empty.
DisplacementVector position_at(std::span<const TrajectorySample> samples, double t);

// ceil(duration * rate) + 1 points starting at the first sample time.
std::vector<DisplacementVector> resample(const Trajectory& trajectory, double rate);

}  // namespace sonicguide

#endif  // SONICGUIDE_TRAJECTORY_H_
