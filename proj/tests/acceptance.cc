// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <new>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>

#include "cli.h"
#include "sonicguide/error.h"
#include "sonicguide/probes.h"
#include "sonicguide/protocol.h"
#include "sonicguide/server.h"
#include "sonicguide/simulated_operator.h"
#include "sonicguide/stream.h"
#include "sonicguide/wav.h"
#include "test_util.h"

namespace {
std::atomic<long> g_allocations{0};
}

void* operator new(std::size_t n) {
  ++g_allocations;
  if (void* p = std::malloc(n == 0 ? 1 : n)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t n) { return operator new(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

namespace sonicguide {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const SynthConfig kSynth;
const MappingConfig kMapping;

std::vector<TrajectorySample> hold(const DisplacementVector& d, double seconds) {
  return {{0.0, d}, {seconds, d}};
}

double high_band_level(std::span<const float> x) {
  double s = 0.0;
  for (double f = 8000.0; f <= 16000.0; f += 250.0) {
    const double a = testing::tone_amplitude(x, kSynth.sample_rate, f);
    s += a * a;
  }
  return s;
}

Outcome origin_neutrality() {
  const auto t0 = Clock::now();
  const AudioBlock origin = render_stream(hold({}, 2.0), kSynth, kMapping).audio;
  const double v = estimate_chroma_rate(origin);
  const AmAnalysis am = analyze_am(origin);
  const double depth = std::max(am.beats.depth, am.roughness.depth);
  // Zone noise: 8-16 kHz level against the same render with the noise bed off.
  MappingConfig quiet = kMapping;
  quiet.noise_gain_in_zone = 0.0;
  const AudioBlock silent_bed = render_stream(hold({}, 2.0), kSynth, quiet).audio;
  const std::span<const float> a(origin.frames.data() + 48000, 48000);
  const std::span<const float> b(silent_bed.frames.data() + 48000, 48000);
  const double ratio_db = 10.0 * std::log10(high_band_level(a) / std::max(high_band_level(b), 1e-30));
  const double runtime = seconds_since(t0);
  return {std::abs(v) < 0.02 && depth < 0.01 && ratio_db > 20.0 && runtime < 5.0,
          fmt("|v| = %.4f oct/s, AM depth = %.4f, zone noise +%.1f dB in 8-16 kHz, %.2f s", std::abs(v),
              depth, ratio_db, runtime)};
}

Outcome mapping_round_trip() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const DisplacementVector d = make_displacement(u(rng), u(rng), u(rng));
    exact += invert_params(map_position(d, kMapping), kMapping) == d;
  }
  return {exact == 1000, fmt("%d/1000 exact", exact)};
}

struct Features {
  double chroma = 0.0;
  double beat_rate = 0.0;
  double roughness = 0.0;
  double centroid = 0.0;
  double bandwidth = 0.0;
};

Features features_at(const DisplacementVector& d, double seconds) {
  const AudioBlock a = render_steady(map_position(d, kMapping), seconds, kSynth, kMapping);
  Features f;
  f.chroma = estimate_chroma_rate(a);
  const AmAnalysis am = analyze_am(a);
  if (am.beats.band == ModulationBand::kBeats) f.beat_rate = am.beats.rate;
  if (am.roughness.band == ModulationBand::kRoughness) f.roughness = am.roughness.depth;
  const SpectralBalance sb = estimate_spectral_balance(a);
  f.centroid = sb.centroid;
  f.bandwidth = sb.bandwidth;
  return f;
}

Outcome audio_monotonicity() {
  struct HalfAxis {
    const char* name;
    int axis;
    double sign;
    std::function<double(const Features&)> feature;
    double calibrated_full;  // expected feature at |c| = 1, 0 when not calibrated
  };
  const std::vector<HalfAxis> halves = {
      {"+x chroma", 0, 1.0, [](const Features& f) { return -f.chroma; }, kMapping.v_max},
      {"-x chroma", 0, -1.0, [](const Features& f) { return f.chroma; }, kMapping.v_max},
      {"-y beat rate", 1, -1.0, [](const Features& f) { return f.beat_rate; }, kMapping.beat_rate_max},
      {"+y roughness", 1, 1.0, [](const Features& f) { return f.roughness; }, 0.0},
      {"+z centroid", 2, 1.0, [](const Features& f) { return f.centroid; }, 0.0},
      {"-z bandwidth", 2, -1.0, [](const Features& f) { return f.bandwidth; }, 0.0},
  };
  bool pass = true;
  std::ostringstream detail;
  for (const auto& h : halves) {
    std::vector<double> mags, values;
    double worst_err = 0.0;
    for (int i = 1; i <= 10; ++i) {
      const double m = i / 10.0;
      double c[3] = {0.0, 0.0, 0.0};
      c[h.axis] = h.sign * m;
      const double v = h.feature(features_at(make_displacement(c[0], c[1], c[2]), 2.0));
      mags.push_back(m);
      values.push_back(v);
      if (h.calibrated_full > 0.0) {
        const double target = h.calibrated_full * m;
        worst_err = std::max(worst_err, std::abs(v - target) / target);
      }
    }
    const double rho = testing::rank_correlation(mags, values);
    const bool ok = rho == 1.0 && worst_err <= 0.05;
    pass &= ok;
    detail << h.name << " rho " << rho;
    if (h.calibrated_full > 0.0) detail << " err " << fmt("%.1f%%", 100.0 * worst_err);
    detail << (ok ? "" : " (fail)") << "; ";
  }
  return {pass, detail.str()};
}

Outcome audio_orthogonality() {
  const double levels[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  Features grid[5][5][5];
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k)
        grid[i][j][k] = features_at(make_displacement(levels[i], levels[j], levels[k]), 1.5);

  struct Owned {
    const char* name;
    int owner;
    double Features::*field;
  };
  const std::vector<Owned> owned = {
      {"chroma", 0, &Features::chroma},       {"beat_rate", 1, &Features::beat_rate},
      {"roughness", 1, &Features::roughness}, {"centroid", 2, &Features::centroid},
      {"bandwidth", 2, &Features::bandwidth},
  };
  // Index `varied` along `axis`; (a, b) on the other two axes in order.
  const auto at = [&](int axis, int varied, int a, int b) -> const Features& {
    int idx[3];
    idx[axis] = varied;
    int* rest[2];
    int n = 0;
    for (int i = 0; i < 3; ++i)
      if (i != axis) rest[n++] = &idx[i];
    *rest[0] = a;
    *rest[1] = b;
    return grid[idx[0]][idx[1]][idx[2]];
  };
  bool pass = true;
  std::ostringstream detail;
  for (const auto& o : owned) {
    double lo = 1e300, hi = -1e300;
    for (int v = 0; v < 5; ++v) {
      const double f = at(o.owner, v, 2, 2).*o.field;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    const double full = hi - lo;
    double worst = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      if (axis == o.owner) continue;
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
          double l = 1e300, h = -1e300;
          for (int v = 0; v < 5; ++v) {
            const double f = at(axis, v, a, b).*o.field;
            l = std::min(l, f);
            h = std::max(h, f);
          }
          worst = std::max(worst, (h - l) / full);
        }
      }
    }
    const bool ok = worst < 0.10;
    pass &= ok;
    detail << o.name << " " << fmt("%.1f%%", 100.0 * worst) << (ok ? "" : " (fail)") << "; ";
  }
  return {pass, "worst cross-axis change / full scale: " + detail.str()};
}

Outcome decoder_monte_carlo() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int good = 0, ambiguous = 0, silent = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DisplacementVector d = make_displacement(u(rng), u(rng), u(rng));
    const AudioBlock a = render_steady(map_position(d, kMapping), 1.0, kSynth, kMapping);
    try {
      const DisplacementVector got = decode_position(a, kMapping, kSynth);
      const double err = std::max({std::abs(got.x - d.x), std::abs(got.y - d.y), std::abs(got.z - d.z)});
      worst = std::max(worst, err);
      good += err <= 0.05;
    } catch (const AmbiguityError&) {
      ++ambiguous;
    } catch (const NoSignalError&) {
      ++silent;
    }
  }
  const double runtime = seconds_since(t0);
  return {good >= 95 && runtime < 600.0,
          fmt("%d/100 within 0.05 per axis (worst %.3f, %d ambiguous, %d no signal), %.1f s", good,
              worst, ambiguous, silent, runtime)};
}

Outcome continuity() {
  // Crossing y = 0 and z = 0 together and separately, guidance tone only.
  const std::vector<std::vector<TrajectorySample>> paths = {
      {{0.0, {0.5f, -0.5f, -0.5f}}, {4.0, {0.5f, 0.5f, 0.5f}}},
      {{0.0, {-0.3f, 0.6f, 0.2f}}, {3.0, {-0.3f, -0.6f, 0.2f}}},
      {{0.0, {0.0f, 0.3f, 0.8f}}, {3.0, {0.0f, 0.3f, -0.8f}}},
  };
  bool pass = true;
  double worst_ratio = 0.0;
  for (const auto& path : paths) {
    const auto swept = render_stream(path, kSynth, kMapping, Mode::k3D, std::nullopt, false);
    double steady = 0.0;
    for (int i = 0; i <= 20; ++i) {
      const DisplacementVector d = position_at(path, path.back().t * i / 20.0);
      steady = std::max(steady, testing::max_step(render_steady(map_position(d, kMapping), 0.5, kSynth, kMapping).frames));
    }
    const double ratio = testing::max_step(swept.audio.frames) / steady;
    worst_ratio = std::max(worst_ratio, ratio);
    pass &= ratio <= 1.1;
  }
  return {pass, fmt("largest sample step = %.3f x steady-state maximum", worst_ratio)};
}

Outcome earcon_fixture() {
  const auto path = read_trajectory_file(SG_FIXTURES "/earcon_crossings.csv").samples;
  const auto r = render_stream(path, kSynth, kMapping);
  const double block = kSynth.block_size / kSynth.sample_rate;
  // Zero crossings of the piecewise-linear fixture.
  const std::vector<double> z_cross = {0.5, 2.5, 3.0 + 0.5 * 0.3 / 0.31};
  const std::vector<double> y_cross = {1.5, 5.0};
  std::vector<double> clicks, triads;
  for (const auto& e : r.events) {
    if (e.kind == EarconKind::kClick) clicks.push_back(e.time);
    if (e.kind == EarconKind::kTriad) triads.push_back(e.time);
  }
  bool pass = clicks.size() == 3 && triads.size() == 2;
  double worst = 0.0;
  if (pass) {
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(clicks[i] - z_cross[i]));
    for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(triads[i] - y_cross[i]));
    pass = worst <= block;
  }
  return {pass, fmt("%zu clicks, %zu triads, worst offset %.2f ms (block %.2f ms)", clicks.size(),
                    triads.size(), worst * 1e3, block * 1e3)};
}

Outcome simulated_operator() {
  const auto t0 = Clock::now();
  OperatorConfig cfg;
  cfg.trials = 100;
  cfg.seed = 7;
  cfg.target_radius = 0.063;
  cfg.start_distance = 0.8;
  const OperatorReport r = run_simulated_operator(cfg);
  return {r.hit_rate >= 0.95,
          fmt("%d/100 hits, median steps %.1f, median time %.2f s, %.0f s", r.hits, r.median_steps,
              r.median_time, seconds_since(t0))};
}

// Drives a real server over TCP, then renders the logged positions with the
// command line renderer and compares the PCM.
Outcome offline_online_equivalence() {
  namespace asio = boost::asio;
  using namespace protocol;
  const auto dir = testing::temp_dir("acceptance_equivalence");
  ServerConfig sc;
  sc.address = {"127.0.0.1", 0};
  sc.log_dir = dir / "logs";
  Server server(sc);
  std::thread runner([&] { server.run(); });

  asio::io_context io;
  asio::ip::tcp::socket socket(io);
  socket.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(server.port())});
  std::vector<std::int16_t> received;
  std::string session_id;
  std::thread reader([&] {
    asio::streambuf buf;
    boost::system::error_code ec;
    while (true) {
      const std::size_t n = asio::read_until(socket, buf, '\n', ec);
      if (ec) break;
      std::string line(asio::buffers_begin(buf.data()), asio::buffers_begin(buf.data()) + n - 1);
      buf.consume(n);
      const ServerMessage m = decode_server(line);
      if (const auto* w = std::get_if<Welcome>(&m)) session_id = w->session;
      if (const auto* a = std::get_if<Audio>(&m))
        received.insert(received.end(), a->samples.begin(), a->samples.end());
    }
  });
  const auto send = [&](const ClientMessage& m) { asio::write(socket, asio::buffer(encode(m) + "\n")); };
  send(Hello{});
  StartTrial st;
  st.seed = 77;
  send(st);
  std::mt19937 rng(5);
  std::normal_distribution<double> step(0.0, 0.05);
  std::uniform_real_distribution<double> gap(0.004, 0.03);
  double t = 0.0;
  DisplacementVector p{0.4f, -0.3f, 0.5f};
  for (int i = 0; i < 400; ++i) {
    t += gap(rng);
    p = make_displacement(std::clamp(p.x + step(rng), -1.0, 1.0), std::clamp(p.y + step(rng), -1.0, 1.0),
                          std::clamp(p.z + step(rng), -1.0, 1.0));
    send(Pos{t, p});
  }
  const double end = t + 0.2;
  send(End{end});
  reader.join();
  server.stop();
  runner.join();

  Trajectory replay = positions_from_log(read_session_log(dir / "logs" / (session_id + ".jsonl")));
  write_trajectory_file(replay, dir / "replay.csv");
  std::ostringstream out, err;
  const int code = cli::run({"render", "--traj", (dir / "replay.csv").string(), "--out",
                             (dir / "replay.wav").string(), "--duration", fmt("%.17g", end)},
                            out, err);
  if (code != 0) return {false, "render failed: " + err.str()};
  const AudioBlock offline = read_wav(dir / "replay.wav");
  std::vector<std::int16_t> expected;
  for (float v : offline.frames) expected.push_back(to_pcm16(v));
  std::size_t diff = 0;
  for (std::size_t i = 0; i < std::min(expected.size(), received.size()); ++i) diff += expected[i] != received[i];
  return {expected == received,
          fmt("%zu samples online, %zu offline, %zu differ", received.size(), expected.size(), diff)};
}

Outcome realtime_budget() {
  SynthState state = init_synth(kSynth);
  std::vector<float> out(kSynth.block_size);
  SonificationParams busy;
  busy.chroma_velocity = -1.2;
  busy.roughness_depth = 0.8;
  busy.fullness = 1.0;
  busy.noise_gain = 0.03;
  for (int i = 0; i < 200; ++i) render_block(state, busy, kSynth, kMapping, out);
  std::vector<double> us(3000);
  const long before = g_allocations;
  for (double& v : us) {
    const auto t0 = Clock::now();
    render_block(state, busy, kSynth, kMapping, out);
    v = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  }
  const long allocations = g_allocations - before;
  std::sort(us.begin(), us.end());
  const double budget = 0.25 * kSynth.block_size / kSynth.sample_rate * 1e6;
  const double median = us[us.size() / 2], p99 = us[us.size() * 99 / 100];
  return {median <= budget && allocations == 0,
          fmt("median %.1f us, p99 %.1f us, budget %.1f us, %ld allocations", median, p99, budget,
              allocations)};
}

}  // namespace
}  // namespace sonicguide

int main() {
  using namespace sonicguide;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"origin_neutrality", origin_neutrality},
      {"mapping_round_trip", mapping_round_trip},
      {"audio_monotonicity", audio_monotonicity},
      {"audio_orthogonality", audio_orthogonality},
      {"decoder_monte_carlo", decoder_monte_carlo},
      {"continuity", continuity},
      {"earcon_fixture", earcon_fixture},
      {"simulated_operator", simulated_operator},
      {"offline_online_equivalence", offline_online_equivalence},
      {"realtime_budget", realtime_budget},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
