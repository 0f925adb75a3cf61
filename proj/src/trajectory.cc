#include "sonicguide/trajectory.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    throw ParseError(line, "invalid number '" + std::string(field) + "'");
  return value;
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

void Trajectory::validate() const {
  if (samples.empty()) throw ValidationError("trajectory needs at least one sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t) || !s.d.finite())
      throw ValidationError("trajectory sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(s.t > samples[i - 1].t))
      throw ValidationError("trajectory times must be strictly increasing (sample " +
                            std::to_string(i) + ")");
    if (mode == Mode::k2D && s.d.z != 0.0f)
      throw ValidationError("2d trajectory has non-zero z at sample " + std::to_string(i));
  }
}

Trajectory parse_trajectory(std::string_view text, Mode mode) {
  Trajectory traj;
  traj.mode = mode;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      if (fields.size() != 4 || trim(fields[0]) != "t" || trim(fields[1]) != "x" ||
          trim(fields[2]) != "y" || trim(fields[3]) != "z")
        throw ParseError(line_no, "expected header 't,x,y,z'");
      have_header = true;
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    TrajectorySample s;
    s.t = parse_number<double>(fields[0], line_no);
    s.d.x = parse_number<float>(fields[1], line_no);
    s.d.y = parse_number<float>(fields[2], line_no);
    s.d.z = parse_number<float>(fields[3], line_no);
    if (!traj.samples.empty() && !(s.t > traj.samples.back().t))
      throw ParseError(line_no, "time must be strictly increasing");
    if (mode == Mode::k2D && s.d.z != 0.0f)
      throw ParseError(line_no, "z must be 0 in 2d mode");
    traj.samples.push_back(s);
  }
  if (!have_header) throw ParseError(0, "missing header 't,x,y,z'");
  if (traj.samples.empty()) throw ParseError(0, "trajectory has no samples");
  return traj;
}

std::string serialize_trajectory(const Trajectory& trajectory) {
  std::string out = "t,x,y,z\n";
  out.reserve(out.size() + trajectory.samples.size() * 48);
  for (const auto& s : trajectory.samples) {
    append_number(out, s.t);
    out += ',';
    append_number(out, s.d.x);
    out += ',';
    append_number(out, s.d.y);
    out += ',';
    append_number(out, s.d.z);
    out += '\n';
  }
  return out;
}

Trajectory read_trajectory_file(const std::filesystem::path& path, Mode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectory(buf.str(), mode);
}

void write_trajectory_file(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trajectory file " + path.string());
  out << serialize_trajectory(trajectory);
  if (!out) throw IoError("failed writing " + path.string());
}

DisplacementVector interpolate(const TrajectorySample& a, const TrajectorySample& b,
                               double t) {
  if (t <= a.t) return a.d;
  if (t >= b.t) return b.d;
  const double alpha = (t - a.t) / (b.t - a.t);
  auto lerp = [alpha](float p, float q) {
    const double pd = p;
    return static_cast<float>(pd + alpha * (static_cast<double>(q) - pd));
  };
  return {lerp(a.d.x, b.d.x), lerp(a.d.y, b.d.y), lerp(a.d.z, b.d.z)};
}

DisplacementVector position_at(std::span<const TrajectorySample> samples, double t) {
  if (t <= samples.front().t) return samples.front().d;
  if (t >= samples.back().t) return samples.back().d;
  const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double v, const TrajectorySample& s) { return v < s.t; });
  return interpolate(*(it - 1), *it, t);
}

std::vector<DisplacementVector> resample(const Trajectory& trajectory, double rate) {
  trajectory.validate();
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw ValidationError("resample rate must be positive");
  const double duration = trajectory.end() - trajectory.start();
  const auto count = static_cast<std::size_t>(std::ceil(duration * rate)) + 1;
  std::vector<DisplacementVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(position_at(trajectory.samples, trajectory.start() + i / rate));
  return out;
}

}  // namespace sonicguide
