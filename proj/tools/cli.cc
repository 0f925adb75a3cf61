#include "cli.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sonicguide/error.h"
#include "sonicguide/probes.h"
#include "sonicguide/server.h"
#include "sonicguide/simulated_operator.h"
#include "sonicguide/stream.h"
#include "sonicguide/trajectory.h"
#include "sonicguide/wav.h"

namespace sonicguide::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ValidationError("bad value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

struct KeyDef {
  ConfigKey doc;
  std::function<void(AppConfig&, std::string_view)> set;
};

template <typename T>
KeyDef number_key(const char* name, const char* help, T& (*field)(AppConfig&)) {
  AppConfig defaults;
  return {{name, format_number(field(defaults)), help},
          [name, field](AppConfig& c, std::string_view v) {
            field(c) = parse_number<T>(name, v);
          }};
}

#define SG_FIELD(type, expr) +[](AppConfig& c) -> type& { return c.expr; }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> keys = [] {
    std::vector<KeyDef> k;
    k.push_back(number_key("sample_rate", "audio sample rate, Hz", SG_FIELD(double, synth.sample_rate)));
    k.push_back(number_key("block_size", "frames per rendered block", SG_FIELD(int, synth.block_size)));
    k.push_back(number_key("partial_count", "octave-spaced partials", SG_FIELD(int, synth.partial_count)));
    k.push_back(number_key("base_frequency", "lowest partial at chroma 0, Hz", SG_FIELD(double, synth.base_frequency)));
    k.push_back(number_key("envelope_center", "spectral envelope center, Hz", SG_FIELD(double, synth.envelope_center)));
    k.push_back(number_key("envelope_width", "envelope half-width, octaves", SG_FIELD(double, synth.envelope_width)));
    k.push_back(number_key("smoothing_time", "parameter smoothing, seconds", SG_FIELD(double, synth.smoothing_time)));
    k.push_back(number_key("master_gain", "output gain", SG_FIELD(double, synth.master_gain)));
    k.push_back(number_key("noise_seed", "pink noise seed", SG_FIELD(std::uint32_t, synth.noise_seed)));
    k.push_back(number_key("v_max", "chroma velocity at |x| = 1, oct/s", SG_FIELD(double, mapping.v_max)));
    k.push_back(number_key("beat_rate_max", "beat rate at y = -1, Hz", SG_FIELD(double, mapping.beat_rate_max)));
    k.push_back(number_key("beat_depth_ramp", "|y| where beats reach full depth", SG_FIELD(double, mapping.beat_depth_ramp)));
    k.push_back(number_key("roughness_rate", "roughness modulator, Hz", SG_FIELD(double, mapping.roughness_rate)));
    k.push_back(number_key("roughness_depth_max", "roughness depth at y = +1", SG_FIELD(double, mapping.roughness_depth_max)));
    k.push_back(number_key("brightness_octave_shift_max", "envelope shift at z = +1, octaves", SG_FIELD(double, mapping.brightness_octave_shift_max)));
    k.push_back(number_key("fullness_bandwidth_max", "extra half-width at z = -1, octaves", SG_FIELD(double, mapping.fullness_bandwidth_max)));
    k.push_back(number_key("target_radius", "target zone radius", SG_FIELD(double, mapping.target_radius)));
    k.push_back(number_key("hysteresis", "plane crossing hysteresis", SG_FIELD(double, mapping.hysteresis)));
    k.push_back(number_key("noise_gain_in_zone", "pink noise gain inside the zone", SG_FIELD(double, mapping.noise_gain_in_zone)));
    k.push_back({{"scaling", "linear", "magnitude scaling, linear or exponential"},
                 [](AppConfig& c, std::string_view v) { c.mapping.scaling = parse_scaling(v); }});
    k.push_back(number_key("curvature", "exponential scaling curvature", SG_FIELD(double, mapping.curvature)));
    k.push_back(number_key("dwell_time", "seconds in the zone that end a trial", SG_FIELD(double, dwell_time)));
    k.push_back(number_key("trial_timeout", "trial time limit, seconds", SG_FIELD(double, trial_timeout)));
    k.push_back(number_key("start_distance", "trial start distance from the target", SG_FIELD(double, start_distance)));
    k.push_back({{"mode", "3d", "2d or 3d"},
                 [](AppConfig& c, std::string_view v) { c.mode = parse_mode(v); }});
    k.push_back({{"addr", std::string(kDefaultAddress), "server address host:port"},
                 [](AppConfig& c, std::string_view v) {
                   parse_address(v);
                   c.addr = std::string(v);
                 }});
    k.push_back({{"log_dir", "", "directory for per-session logs"},
                 [](AppConfig& c, std::string_view v) {
                   c.log_dir = v.empty() ? std::nullopt
                                         : std::optional<std::filesystem::path>(std::string(v));
                 }});
    return k;
  }();
  return keys;
}

#undef SG_FIELD

std::string keys_footer() {
  std::ostringstream os;
  os << "Config keys (key = value in --config files, or --set key=value):\n";
  for (const auto& k : config_keys()) {
    os << "  " << std::left << std::setw(30) << k.name << k.help;
    if (!k.default_value.empty()) os << " [" << k.default_value << "]";
    os << "\n";
  }
  return os.str();
}

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string mode;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_file, "key = value settings file")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", common.sets, "override one setting, key=value");
  sub->add_option("--mode", common.mode, "2d or 3d");
}

AppConfig resolve(const Common& common) {
  AppConfig cfg;
  if (!common.config_file.empty()) apply_config_file(cfg, common.config_file);
  for (const auto& s : common.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, trim(std::string_view(s).substr(0, eq)),
                  trim(std::string_view(s).substr(eq + 1)));
  }
  if (!common.mode.empty()) cfg.mode = parse_mode(common.mode);
  cfg.synth.validate();
  cfg.mapping.validate();
  return cfg;
}

void print_render_summary(std::ostream& out, const StreamRender& r) {
  int counts[4] = {0, 0, 0, 0};
  for (const auto& e : r.events) ++counts[static_cast<int>(e.kind)];
  out << std::fixed << std::setprecision(3) << "duration " << r.audio.duration() << " s, "
      << r.audio.frames.size() << " frames, " << r.events.size() << " events (click "
      << counts[0] << ", triad " << counts[1] << ", zone_enter " << counts[2] << ", zone_exit "
      << counts[3] << ")\n";
  for (const auto& e : r.events) out << "  " << e.time << " " << to_string(e.kind) << "\n";
  out.unsetf(std::ios::floatfield);
}

WavFormat parse_format(const std::string& s) {
  if (s == "pcm16") return WavFormat::kPcm16;
  if (s == "float32") return WavFormat::kFloat32;
  throw ValidationError("format must be pcm16 or float32");
}

nlohmann::json frame_json(const FeatureFrame& f) {
  return {{"time", f.time},
          {"duration", f.duration},
          {"chroma_rate", f.chroma_rate},
          {"am_rate", f.am_rate},
          {"am_depth", f.am_depth},
          {"modulation_band", to_string(f.modulation_band)},
          {"spectral_centroid", f.spectral_centroid},
          {"envelope_bandwidth", f.envelope_bandwidth}};
}

}  // namespace

void apply_setting(AppConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : key_table()) {
    if (k.doc.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ValidationError("unknown setting '" + std::string(key) + "'");
}

void apply_config_text(AppConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str());
}

std::vector<ConfigKey> config_keys() {
  std::vector<ConfigKey> out;
  for (const auto& k : key_table()) out.push_back(k.doc);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Psychoacoustic guidance sonification: render, analyze, serve, simulate",
               "sonicguide"};
  app.footer(keys_footer());
  app.require_subcommand(1);

  Common common;
  std::string traj, out_path, format = "pcm16";
  std::optional<double> duration;
  bool no_earcons = false;
  auto* render = app.add_subcommand("render", "render a trajectory CSV to WAV");
  add_common(render, common);
  render->add_option("--traj", traj, "trajectory CSV (t,x,y,z)")->required()->check(CLI::ExistingFile);
  render->add_option("--out", out_path, "output WAV")->required();
  render->add_option("--duration", duration, "seconds, default: last sample time");
  render->add_option("--format", format, "pcm16 or float32");
  render->add_flag("--no-earcons", no_earcons, "leave clicks and triads out of the audio");

  std::string axis, csv_path;
  double sweep_seconds = 20.0;
  int sweep_points = 201;
  auto* sweep = app.add_subcommand("sweep", "-1 to +1 sweep along one axis, as CSV and WAV");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "x, y or z")->required()->check(CLI::IsMember({"x", "y", "z"}));
  sweep->add_option("--out", out_path, "output WAV")->required();
  sweep->add_option("--csv", csv_path, "output CSV, default: WAV path with .csv");
  sweep->add_option("--seconds", sweep_seconds, "sweep duration")->check(CLI::PositiveNumber);
  sweep->add_option("--points", sweep_points, "trajectory samples")->check(CLI::Range(2, 1000000));

  std::string in_path;
  bool decode = false;
  double window = 1.0, hop = 0.5;
  auto* analyze = app.add_subcommand("analyze", "feature frames of a WAV file as JSON lines");
  add_common(analyze, common);
  analyze->add_option("--in", in_path, "input WAV")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--decode", decode, "print decoded positions instead of features");
  analyze->add_option("--window", window, "analysis window, seconds")->check(CLI::PositiveNumber);
  analyze->add_option("--hop", hop, "hop between windows, seconds")->check(CLI::PositiveNumber);

  std::string addr;
  auto* serve = app.add_subcommand("serve", "run the guidance server until interrupted");
  add_common(serve, common);
  serve->add_option("--addr", addr, "host:port, default SONIC_GUIDE_ADDR or " +
                                        std::string(kDefaultAddress));
  std::string log_dir;
  serve->add_option("--log-dir", log_dir, "write one JSON-lines log per session here");

  OperatorConfig op;
  std::string report_path, paths_dir, agent_log;
  bool verbose = false;
  auto* agent = app.add_subcommand("agent", "simulated operator trials");
  add_common(agent, common);
  agent->add_option("--trials", op.trials, "number of trials")->check(CLI::NonNegativeNumber);
  agent->add_option("--seed", op.seed, "run seed");
  agent->add_option("--report", report_path, "JSON report file");
  agent->add_option("--paths", paths_dir, "directory for per-trial path CSVs");
  agent->add_option("--log", agent_log, "JSON-lines session log");
  agent->add_option("--window", op.analysis_window, "seconds of audio per decode");
  agent->add_option("--step-gain", op.step_gain, "move = -gain * decoded position");
  agent->add_option("--max-step", op.max_step, "cap on one move");
  agent->add_option("--max-steps", op.max_steps, "listening windows per trial");
  agent->add_option("--radius", op.target_radius, "target radius");
  agent->add_flag("--verbose", verbose, "one line per trial on stderr");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const AppConfig cfg = resolve(common);

    if (render->parsed()) {
      const Trajectory t = read_trajectory_file(traj, cfg.mode);
      const StreamRender r = render_stream(t.samples, cfg.synth, cfg.mapping, cfg.mode,
                                           duration, !no_earcons);
      write_wav(r.audio, out_path, parse_format(format));
      print_render_summary(out, r);
      return kExitOk;
    }

    if (sweep->parsed()) {
      Trajectory t;
      t.mode = cfg.mode;
      if (cfg.mode == Mode::k2D && axis == "z")
        throw ValidationError("z sweep needs 3d mode");
      for (int i = 0; i < sweep_points; ++i) {
        const double u = static_cast<double>(i) / (sweep_points - 1);
        const double v = -1.0 + 2.0 * u;
        t.samples.push_back({sweep_seconds * u, make_displacement(axis == "x" ? v : 0.0,
                                                                  axis == "y" ? v : 0.0,
                                                                  axis == "z" ? v : 0.0)});
      }
      std::filesystem::path csv = csv_path.empty()
                                      ? std::filesystem::path(out_path).replace_extension(".csv")
                                      : std::filesystem::path(csv_path);
      write_trajectory_file(t, csv);
      const StreamRender r = render_stream(t.samples, cfg.synth, cfg.mapping, cfg.mode,
                                           sweep_seconds, true);
      write_wav(r.audio, out_path);
      out << "wrote " << csv.string() << " and " << out_path << "\n";
      print_render_summary(out, r);
      return kExitOk;
    }

    if (analyze->parsed()) {
      const AudioBlock audio = read_wav(in_path);
      const auto win = static_cast<std::size_t>(std::lround(window * audio.sample_rate));
      const auto step = std::max<std::size_t>(1, std::lround(hop * audio.sample_rate));
      if (win > audio.frames.size())
        throw ValidationError("audio is shorter than one analysis window");
      SynthConfig synth = cfg.synth;
      synth.sample_rate = audio.sample_rate;
      for (std::size_t start = 0; start + win <= audio.frames.size(); start += step) {
        const AudioBlock slice{audio.sample_rate,
                               std::vector<float>(audio.frames.begin() + start,
                                                  audio.frames.begin() + start + win)};
        const double time = start / audio.sample_rate;
        nlohmann::json line;
        try {
          if (decode) {
            const DisplacementVector d = decode_position(slice, cfg.mapping, synth);
            line = {{"time", time}, {"duration", window}, {"x", d.x}, {"y", d.y}, {"z", d.z}};
          } else {
            FeatureFrame f = extract_features(slice);
            f.time = time;
            line = frame_json(f);
          }
        } catch (const AmbiguityError& e) {
          line = {{"time", time}, {"duration", window}, {"error", "ambiguous"}};
        } catch (const NoSignalError& e) {
          line = {{"time", time}, {"duration", window}, {"error", "no_signal"}};
        }
        out << line.dump() << "\n";
      }
      return kExitOk;
    }

    if (serve->parsed()) {
      ServerConfig sc;
      sc.address = parse_address(!addr.empty() ? addr : !cfg.addr.empty() ? cfg.addr
                                                                            : default_address());
      sc.session.synth = cfg.synth;
      sc.session.mapping = cfg.mapping;
      sc.session.mode = cfg.mode;
      sc.session.dwell_time = cfg.dwell_time;
      sc.session.trial_timeout = cfg.trial_timeout;
      sc.session.start_distance = cfg.start_distance;
      if (!log_dir.empty()) sc.log_dir = std::filesystem::path(log_dir);
      else sc.log_dir = cfg.log_dir;
      sc.handle_signals = true;
      Server server(sc);
      out << "listening on " << sc.address.host << ":" << server.port() << std::endl;
      server.run();
      return kExitOk;
    }

    if (agent->parsed()) {
      op.synth = cfg.synth;
      op.mapping = cfg.mapping;
      op.mode = cfg.mode;
      op.start_distance = cfg.start_distance;
      op.dwell_time = cfg.dwell_time;
      if (!agent_log.empty()) op.log_path = std::filesystem::path(agent_log);
      const OperatorReport report = run_simulated_operator(op, [&](const TrialRecord& r) {
        if (verbose) {
          err << "trial " << r.trial << " " << to_string(r.outcome) << " steps " << r.steps
              << " time " << r.time_to_target << "\n";
        }
      });
      if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw IoError("cannot write " + report_path);
        f << report_json(report) << "\n";
      }
      if (!paths_dir.empty()) {
        std::filesystem::create_directories(paths_dir);
        for (const auto& r : report.trials) {
          char name[32];
          std::snprintf(name, sizeof name, "trial_%03d.csv", r.trial);
          write_trajectory_file(r.path, std::filesystem::path(paths_dir) / name);
        }
      }
      out << "trials " << report.trials.size() << ", hits " << report.hits << ", hit_rate "
          << report.hit_rate << ", median_steps " << report.median_steps << ", median_time "
          << report.median_time << " s\n";
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sonicguide::cli
