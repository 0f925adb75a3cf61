#include "sonicguide/probes.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "dsp.h"
#include "envelope.h"
#include "sonicguide/error.h"

namespace sonicguide {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Envelope analysis runs at about this rate after decimation.
constexpr double kEnvelopeRate = 1000.0;
// Trimmed from both ends of the filtered envelope.
constexpr double kEnvelopeTrim = 0.05;
// Skipped before fitting beats once roughness has been divided out.
constexpr double kDivisionSettle = 0.1;

// Beats shallower than this are read as sitting inside the depth ramp.
constexpr double kFullDepth = 0.9;

void check_audio(const AudioBlock& audio, const ProbeConfig& cfg) {
  cfg.validate();
  if (!(audio.sample_rate > 0.0)) throw ValidationError("audio sample rate must be positive");
  if (audio.duration() < cfg.min_duration - 1e-9)
    throw ValidationError("analysis needs at least " + std::to_string(cfg.min_duration) +
                          " s of audio");
  const double level = dsp::rms(audio.frames);
  if (!(level > 0.0) || 20.0 * std::log10(level) < cfg.silence_dbfs)
    throw NoSignalError("audio is below " + std::to_string(cfg.silence_dbfs) + " dBFS");
}

std::size_t settle_frames(const AudioBlock& audio, const ProbeConfig& cfg) {
  return static_cast<std::size_t>(std::lround(cfg.settle_time * audio.sample_rate));
}

dsp::Spectrogram spectrogram(const AudioBlock& audio, const ProbeConfig& cfg) {
  auto spec = dsp::power_spectrogram(audio.frames, audio.sample_rate,
                                     settle_frames(audio, cfg), cfg.window, cfg.hop,
                                     cfg.fft_size);
  if (spec.frames.empty()) throw ValidationError("audio too short for one analysis frame");
  return spec;
}

// Power ratio of the fundamental to the mean of g(t)^2 for
// g = 1 - D (1 - cos)/2. Rises monotonically from 0 to 4/3 over D in [0, 1].
double fundamental_ratio(double depth) {
  const double c = 1.0 - 0.5 * depth;
  return depth * c / (c * c + depth * depth / 8.0);
}

double depth_from_ratio(double ratio) {
  if (!(ratio > 0.0)) return 0.0;
  if (ratio >= fundamental_ratio(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fundamental_ratio(mid) < ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Decimated power envelope. Sample i sits at t0 + i / fs seconds from the
// start of the analyzed signal.
struct Envelope {
  std::vector<double> values;
  double fs = 0.0;
  double t0 = 0.0;
};

struct SinusoidFit {
  double residual = 0.0;
  double mean = 0.0;
  double fundamental = 0.0;
  double phase = 0.0;  // fundamental is cos(w t - phase)
};

// Least squares on {1, cos wt, sin wt, cos 2wt, sin 2wt}.
SinusoidFit fit_sinusoid(std::span<const double> env, double fs, double freq) {
  Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> atb = Eigen::Matrix<double, 5, 1>::Zero();
  double btb = 0.0;
  const double w = kTwoPi * freq / fs;
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double ph = w * static_cast<double>(i);
    Eigen::Matrix<double, 5, 1> row;
    row << 1.0, std::cos(ph), std::sin(ph), std::cos(2.0 * ph), std::sin(2.0 * ph);
    ata.noalias() += row * row.transpose();
    atb += row * env[i];
    btb += env[i] * env[i];
  }
  const Eigen::Matrix<double, 5, 1> coef = ata.ldlt().solve(atb);
  SinusoidFit fit;
  fit.residual = std::max(0.0, btb - coef.dot(atb));
  fit.mean = coef[0];
  fit.fundamental = std::hypot(coef[1], coef[2]);
  fit.phase = std::atan2(coef[2], coef[1]);
  return fit;
}

// Envelope autocorrelation peak, used to seed the fit when the window holds
// at least two periods. Returns 0 when there is no usable peak.
double autocorrelation_rate(std::span<const double> env, double fs, double lo, double hi) {
  const std::size_t n = env.size();
  double mean = 0.0;
  for (double v : env) mean += v;
  mean /= n;
  const auto min_lag = static_cast<std::size_t>(std::floor(fs / hi));
  const auto max_lag = std::min(n / 2, static_cast<std::size_t>(std::ceil(fs / lo)));
  if (max_lag <= min_lag + 2) return 0.0;
  std::vector<double> ac(max_lag + 2, 0.0);
  for (std::size_t lag = 0; lag < ac.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (env[i] - mean) * (env[i + lag] - mean);
    ac[lag] = acc / (n - lag);
  }
  if (!(ac[0] > 0.0)) return 0.0;
  std::size_t best = 0;
  for (std::size_t lag = std::max<std::size_t>(min_lag, 1); lag <= max_lag; ++lag) {
    if (ac[lag] > ac[lag - 1] && ac[lag] >= ac[lag + 1] && ac[lag] > 0.3 * ac[0]) {
      best = lag;
      break;
    }
  }
  if (best == 0) return 0.0;
  const double a = ac[best - 1], b = ac[best], c = ac[best + 1];
  const double denom = a - 2.0 * b + c;
  const double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return fs / (best + delta);
}

struct BandFit {
  AmEstimate estimate;
  double phase = 0.0;  // modulator phase at the envelope's t0, radians
  double t0 = 0.0;
  double cycles = 0.0;  // modulator periods inside the fitted envelope
};

BandFit fit_band(const Envelope& envelope, double lo, double hi, double threshold,
                 ModulationBand band) {
  const std::span<const double> env = envelope.values;
  const double fs = envelope.fs;
  const double duration = env.size() / fs;
  auto residual = [&](double f) { return fit_sinusoid(env, fs, f).residual; };

  // The residual has side minima about 1/duration apart, so the search is a
  // grid fine enough to land in the main one, narrowed by the autocorrelation
  // seed when it is trustworthy.
  double scan_lo = lo, scan_hi = hi;
  const double seed = autocorrelation_rate(env, fs, lo, hi);
  if (seed > 0.0 && seed * duration >= 2.0) {
    scan_lo = std::max(lo, 0.95 * seed);
    scan_hi = std::min(hi, 1.05 * seed);
  }
  const double step = 0.05 / duration;
  double best_f = scan_lo, best_r = INFINITY;
  for (double f = scan_lo; f <= scan_hi + 1e-9; f += step) {
    const double r = residual(f);
    if (r < best_r) {
      best_r = r;
      best_f = f;
    }
  }
  // Golden-section refinement around the coarse optimum.
  double a = std::max(lo, best_f - step), b = std::min(hi, best_f + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double rc = residual(c), rd = residual(d);
  for (int i = 0; i < 40; ++i) {
    if (rc < rd) {
      b = d;
      d = c;
      rd = rc;
      c = b - g * (b - a);
      rc = residual(c);
    } else {
      a = c;
      c = d;
      rc = rd;
      d = a + g * (b - a);
      rd = residual(d);
    }
  }
  const double rate = 0.5 * (a + b);
  const SinusoidFit fit = fit_sinusoid(env, fs, rate);
  BandFit out;
  out.estimate.rate = rate;
  out.estimate.depth = fit.mean > 0.0 ? depth_from_ratio(fit.fundamental / fit.mean) : 0.0;
  out.estimate.band = out.estimate.depth >= threshold ? band : ModulationBand::kNone;
  out.phase = -fit.phase;
  out.t0 = envelope.t0;
  out.cycles = rate * duration;
  return out;
}

// Power envelope filtered to [lo, hi] Hz (plus its mean when lo > 0),
// decimated, with the filter edges trimmed.
Envelope envelope_band(std::span<const double> power, double sr, double lo, double hi) {
  double mean = 0.0;
  for (double v : power) mean += v;
  mean /= power.size();
  const auto filtered = dsp::brickwall(power, sr, lo, hi);
  const auto q = std::max<std::size_t>(1, static_cast<std::size_t>(sr / kEnvelopeRate));
  Envelope env;
  env.fs = sr / q;
  for (std::size_t i = 0; i < filtered.size(); i += q)
    env.values.push_back(filtered[i] + (lo > 0.0 ? mean : 0.0));
  const auto trim = static_cast<std::size_t>(kEnvelopeTrim * env.fs);
  if (env.values.size() > 4 * trim) {
    env.values = std::vector<double>(env.values.begin() + trim, env.values.end() - trim);
    env.t0 = static_cast<double>(trim * q) / sr;
  }
  return env;
}

SpectralBalance balance_of(std::span<const double> power, double bin_hz,
                           const ProbeConfig& cfg, double sample_rate) {
  const double hi = std::min(cfg.spectrum_hi, 0.5 * sample_rate);
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    const double f = k * bin_hz;
    if (f < cfg.spectrum_lo || f > hi) continue;
    const double lf = std::log2(f);
    w += power[k];
    m1 += power[k] * lf;
    m2 += power[k] * lf * lf;
  }
  if (!(w > 0.0)) throw NoSignalError("no spectral energy in the analysis range");
  SpectralBalance out;
  out.centroid = m1 / w;
  out.bandwidth = std::sqrt(std::max(0.0, m2 / w - out.centroid * out.centroid));
  return out;
}

// |Hann transform|^2 tabulated every 1/64 cycle per window up to 16 cycles.
class KernelTable {
 public:
  static constexpr int kSteps = 64;
  static constexpr int kReach = 16;

  KernelTable() {
    for (int i = 0; i <= kSteps * kReach; ++i)
      table_[i] = dsp::hann_kernel_power(static_cast<double>(i) / kSteps);
  }

  double operator()(double d) const {
    const double pos = std::abs(d) * kSteps;
    const auto i = static_cast<std::size_t>(pos);
    if (i >= table_.size() - 1) return 0.0;
    const double frac = pos - i;
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  std::array<double, kSteps * kReach + 1> table_{};
};

const KernelTable& kernel_table() {
  static const KernelTable table;
  return table;
}

}  // namespace

std::string_view to_string(ModulationBand band) {
  switch (band) {
    case ModulationBand::kBeats:
      return "beats";
    case ModulationBand::kRoughness:
      return "roughness";
    case ModulationBand::kNone:
      break;
  }
  return "none";
}

void ProbeConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
  };
  require(window >= 256 && hop > 0 && hop <= window, "invalid STFT window or hop");
  require(fft_size >= window && std::has_single_bit(static_cast<unsigned>(fft_size)),
          "fft_size must be a power of two >= window");
  require(settle_time >= 0.0 && min_duration > 0.0, "invalid analysis durations");
  require(depth_threshold > 0.0 && depth_threshold < 1.0, "depth_threshold must be in (0, 1)");
  require(chroma_lag >= 1 && chroma_max_rate > 0.0 && chroma_bins_per_octave >= 12,
          "invalid chroma settings");
  require(chroma_lo > 0.0 && chroma_hi > chroma_lo, "invalid chroma range");
  require(beat_lo > 0.0 && beat_hi > beat_lo && roughness_lo > beat_hi &&
              roughness_hi > roughness_lo,
          "modulation bands must be ordered and disjoint");
  require(roughness_split > 0.0, "roughness_split must be positive");
  require(spectrum_lo > 0.0 && spectrum_hi > spectrum_lo, "invalid spectrum range");
}

AmEstimate AmAnalysis::dominant() const {
  const bool b = beats.band != ModulationBand::kNone;
  const bool r = roughness.band != ModulationBand::kNone;
  if (b && (!r || beats.depth >= roughness.depth)) return beats;
  if (r) return roughness;
  const AmEstimate& deeper = beats.depth >= roughness.depth ? beats : roughness;
  return AmEstimate{deeper.rate, deeper.depth, ModulationBand::kNone};
}

double estimate_chroma_rate(const AudioBlock& audio, const ProbeConfig& cfg) {
  check_audio(audio, cfg);
  const auto spec = spectrogram(audio, cfg);
  const std::size_t lag = cfg.chroma_lag;
  if (spec.frames.size() <= lag) throw ValidationError("audio too short for chroma analysis");

  const double hi = std::min(cfg.chroma_hi, 0.45 * audio.sample_rate);
  const double bpo = cfg.chroma_bins_per_octave;
  const auto grid_size = static_cast<std::size_t>(std::floor(std::log2(hi / cfg.chroma_lo) * bpo)) + 1;

  // Magnitude on a log-frequency grid, mean removed per frame.
  std::vector<std::vector<double>> grid(spec.frames.size(), std::vector<double>(grid_size));
  std::vector<double> bin_pos(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j)
    bin_pos[j] = cfg.chroma_lo * std::exp2(j / bpo) / spec.bin_hz;
  for (std::size_t i = 0; i < spec.frames.size(); ++i) {
    const auto& power = spec.frames[i];
    double mean = 0.0;
    for (std::size_t j = 0; j < grid_size; ++j) {
      const auto k = static_cast<std::size_t>(bin_pos[j]);
      const double frac = bin_pos[j] - k;
      const double mag =
          (1.0 - frac) * std::sqrt(power[k]) + frac * std::sqrt(power[std::min(k + 1, power.size() - 1)]);
      grid[i][j] = mag;
      mean += mag;
    }
    mean /= grid_size;
    for (double& v : grid[i]) v -= mean;
  }

  // Deep beats move a frame's energy toward one side of its window, and with
  // it the instant the drifting spectrum is sampled at. Frames are therefore
  // stamped with the energy centroid of window^2 times the power envelope.
  const auto envelope = dsp::analytic_power(audio.frames, audio.sample_rate);
  const auto window = dsp::hann(cfg.window);
  std::vector<double> stamp(grid.size());
  const std::size_t first = settle_frames(audio, cfg);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t start = first + i * cfg.hop;
    double w = 0.0, wt = 0.0;
    for (std::size_t n = 0; n < window.size(); ++n) {
      const double e = window[n] * window[n] * envelope[start + n];
      w += e;
      wt += e * static_cast<double>(n);
    }
    const double center = w > 0.0 ? wt / w : 0.5 * cfg.window;
    stamp[i] = (static_cast<double>(start) + center) / audio.sample_rate;
  }

  // Best shift per frame pair, then a weighted least-squares slope of shift
  // against elapsed time.
  const double lag_seconds = static_cast<double>(lag * cfg.hop) / audio.sample_rate;
  const auto max_shift = static_cast<std::ptrdiff_t>(
      std::min<double>(std::ceil(cfg.chroma_max_rate * lag_seconds * bpo), 0.45 * bpo));
  std::vector<double> corr(2 * max_shift + 1);
  const auto n = static_cast<std::ptrdiff_t>(grid_size);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + lag < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[i + lag];
    for (std::ptrdiff_t s = -max_shift; s <= max_shift; ++s) {
      double acc = 0.0;
      const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, -s);
      const std::ptrdiff_t j1 = std::min(n, n - s);
      for (std::ptrdiff_t j = j0; j < j1; ++j) acc += a[j] * b[j + s];
      corr[s + max_shift] = acc;
    }
    const auto peak = static_cast<std::ptrdiff_t>(
        std::max_element(corr.begin(), corr.end()) - corr.begin());
    const double weight = corr[peak];
    if (!(weight > 0.0)) continue;
    double shift = static_cast<double>(peak - max_shift);
    if (peak > 0 && peak + 1 < static_cast<std::ptrdiff_t>(corr.size())) {
      const double pa = corr[peak - 1], pb = corr[peak], pc = corr[peak + 1];
      const double denom = pa - 2.0 * pb + pc;
      if (denom < 0.0) shift += 0.5 * (pa - pc) / denom;
    }
    const double dt = stamp[i + lag] - stamp[i];
    num += weight * (shift / bpo) * dt;
    den += weight * dt * dt;
  }
  if (!(den > 0.0)) throw NoSignalError("no correlated spectral frames");
  return num / den;
}

AmAnalysis analyze_am(const AudioBlock& audio, const ProbeConfig& cfg) {
  check_audio(audio, cfg);
  const std::span<const float> x =
      std::span<const float>(audio.frames).subspan(settle_frames(audio, cfg));
  const double sr = audio.sample_rate;
  AmAnalysis out;

  // Roughness: low partials are dropped first, otherwise octave pairs such as
  // 65/130 Hz beat inside the roughness band. The cut follows the pitch so
  // that no partial loses one of its sidebands.
  const auto upper = dsp::gap_split_analytic_power(x, sr, cfg.roughness_split);
  const BandFit rough =
      fit_band(envelope_band(upper, sr, 0.75 * cfg.roughness_lo, 2.0 * cfg.roughness_hi),
               cfg.roughness_lo, cfg.roughness_hi, cfg.depth_threshold,
               ModulationBand::kRoughness);
  out.roughness = rough.estimate;

  // Beats: full-band envelope, flat for an unmodulated tone. Roughness found
  // above is divided out first; its sidebands on partials near the roughness
  // rate would otherwise beat slowly against the next octave.
  // Near the troughs the division magnifies any remaining onset of the depth
  // by up to 1 / (1 - depth), so a further stretch is skipped first.
  std::vector<float> plain(x.begin(), x.end());
  if (rough.estimate.band != ModulationBand::kNone) {
    const double depth = rough.estimate.depth;
    const double w = kTwoPi * rough.estimate.rate / sr;
    const double offset = rough.phase - w * rough.t0 * sr;
    for (std::size_t n = 0; n < plain.size(); ++n) {
      const double gain = 1.0 - 0.5 * depth * (1.0 - std::cos(w * n + offset));
      plain[n] = static_cast<float>(plain[n] / std::max(gain, 0.05));
    }
    const auto skip = std::min(plain.size() / 4, static_cast<std::size_t>(kDivisionSettle * sr));
    plain.erase(plain.begin(), plain.begin() + static_cast<std::ptrdiff_t>(skip));
  }
  const auto full = dsp::analytic_power(plain, sr);
  const BandFit beats = fit_band(envelope_band(full, sr, 0.0, 2.0 * cfg.beat_hi), cfg.beat_lo,
                                 cfg.beat_hi, cfg.depth_threshold, ModulationBand::kBeats);
  out.beats = beats.estimate;
  // Under roughness, less than one beat period is indistinguishable from the
  // roughness depth drifting while the sound moves.
  if (rough.estimate.band != ModulationBand::kNone && beats.cycles < 1.0)
    out.beats.band = ModulationBand::kNone;
  return out;
}

AmEstimate estimate_am(const AudioBlock& audio, const ProbeConfig& cfg) {
  return analyze_am(audio, cfg).dominant();
}

SpectralBalance estimate_spectral_balance(const AudioBlock& audio, const ProbeConfig& cfg) {
  check_audio(audio, cfg);
  const auto spec = spectrogram(audio, cfg);
  std::vector<double> mean(spec.frames.front().size(), 0.0);
  for (const auto& frame : spec.frames)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += frame[k];
  return balance_of(mean, spec.bin_hz, cfg, audio.sample_rate);
}

FeatureFrame extract_features(const AudioBlock& audio, const ProbeConfig& cfg) {
  FeatureFrame frame;
  frame.duration = audio.duration();
  frame.chroma_rate = estimate_chroma_rate(audio, cfg);
  const AmEstimate am = estimate_am(audio, cfg);
  frame.am_rate = am.rate;
  frame.am_depth = am.depth;
  frame.modulation_band = am.band;
  const SpectralBalance sb = estimate_spectral_balance(audio, cfg);
  frame.spectral_centroid = sb.centroid;
  frame.envelope_bandwidth = sb.bandwidth;
  return frame;
}

std::vector<FeatureFrame> extract_feature_frames(const AudioBlock& audio,
                                                 double window_seconds, double hop_seconds,
                                                 const ProbeConfig& cfg) {
  if (!(window_seconds > 0.0) || !(hop_seconds > 0.0))
    throw ValidationError("window and hop must be positive");
  const auto window = static_cast<std::size_t>(std::lround(window_seconds * audio.sample_rate));
  const auto hop = static_cast<std::size_t>(std::lround(hop_seconds * audio.sample_rate));
  if (window > audio.frames.size())
    throw ValidationError("audio is shorter than one analysis window");
  std::vector<FeatureFrame> frames;
  for (std::size_t start = 0; start + window <= audio.frames.size(); start += hop) {
    AudioBlock slice{audio.sample_rate,
                     std::vector<float>(audio.frames.begin() + start,
                                        audio.frames.begin() + start + window)};
    FeatureFrame f = extract_features(slice, cfg);
    f.time = start / audio.sample_rate;
    frames.push_back(f);
  }
  return frames;
}

SpectralBalance model_spectral_balance(const SonificationParams& params,
                                       const SynthConfig& synth,
                                       const MappingConfig& mapping,
                                       const ProbeConfig& cfg) {
  constexpr int kPhases = 16;
  const KernelTable& kernel = kernel_table();
  const double sr = synth.sample_rate;
  const double bin_hz = sr / cfg.fft_size;
  // Window transform offsets are in cycles per window.
  const double cycles_per_hz = cfg.window / sr;
  const double reach_hz = KernelTable::kReach / cycles_per_hz;
  std::vector<double> power(cfg.fft_size / 2 + 1, 0.0);

  double depth = 0.0, mod_rate = 0.0;
  if (params.roughness_depth > 0.0) {
    depth = params.roughness_depth;
    mod_rate = mapping.roughness_rate;
  } else if (params.beat_depth > 0.0) {
    depth = params.beat_depth;
    mod_rate = params.beat_rate;
  }
  const double carrier = (1.0 - 0.5 * depth) * (1.0 - 0.5 * depth);
  const double side = depth * depth / 16.0;

  auto add_line = [&](double f, double p) {
    f = std::abs(f);
    const auto k0 = static_cast<std::ptrdiff_t>(std::ceil((f - reach_hz) / bin_hz));
    const auto k1 = static_cast<std::ptrdiff_t>(std::floor((f + reach_hz) / bin_hz));
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(k0, 0);
         k <= std::min<std::ptrdiff_t>(k1, power.size() - 1); ++k) {
      power[k] += p * kernel((k * bin_hz - f) * cycles_per_hz);
    }
  };

  const double log_base_rel = std::log2(synth.base_frequency / synth.envelope_center);
  const double center = params.brightness * mapping.brightness_octave_shift_max;
  const double half_width = synth.envelope_width + params.fullness * mapping.fullness_bandwidth_max;
  std::array<double, kMaxPartials> amp{};
  for (int ph = 0; ph < kPhases; ++ph) {
    const double c = (ph + 0.5) / kPhases;
    double total = 0.0;
    for (int k = 0; k < synth.partial_count; ++k) {
      const double position = k + c;
      const double f = synth.base_frequency * std::exp2(position);
      amp[k] = detail::partial_gain(log_base_rel + position - center, half_width, position,
                                    synth.partial_count, f, sr);
      total += amp[k] * amp[k];
    }
    if (!(total > 0.0)) continue;
    for (int k = 0; k < synth.partial_count; ++k) {
      if (amp[k] == 0.0) continue;
      const double f = synth.base_frequency * std::exp2(k + c);
      const double p = amp[k] * amp[k] / total;
      add_line(f, p * carrier);
      if (depth > 0.0) {
        add_line(f - mod_rate, p * side);
        add_line(f + mod_rate, p * side);
      }
    }
  }
  return balance_of(power, bin_hz, cfg, sr);
}

DisplacementVector decode_position(const AudioBlock& audio, const MappingConfig& mapping,
                                   const SynthConfig& synth, const ProbeConfig& cfg) {
  mapping.validate();
  synth.validate();
  check_audio(audio, cfg);

  SonificationParams params;
  params.chroma_velocity =
      std::clamp(estimate_chroma_rate(audio, cfg), -mapping.v_max, mapping.v_max);

  const AmAnalysis am = analyze_am(audio, cfg);
  const bool beats = am.beats.band != ModulationBand::kNone;
  const bool rough = am.roughness.band != ModulationBand::kNone;
  if (beats && rough)
    throw AmbiguityError("both beats (" + std::to_string(am.beats.rate) + " Hz) and roughness (" +
                         std::to_string(am.roughness.rate) + " Hz) are present");
  if (beats && am.beats.depth < kFullDepth) {
    // Inside the depth ramp the window holds a fraction of a beat and the
    // rate is poorly determined; the depth alone places y in the dead band.
    params.beat_depth = am.beats.depth;
  } else if (beats) {
    params.beat_rate = std::clamp(am.beats.rate, 0.0, mapping.beat_rate_max);
    params.beat_depth =
        std::min(1.0, params.beat_rate / mapping.beat_rate_max / mapping.beat_depth_ramp);
  } else if (rough) {
    params.roughness_depth = std::clamp(am.roughness.depth, 0.0, mapping.roughness_depth_max);
  }

  // z: match centroid and spread against the model, each scaled by its own
  // full-scale response.
  const SpectralBalance measured = estimate_spectral_balance(audio, cfg);
  auto model_at = [&](double z) {
    SonificationParams p = params;
    p.brightness = std::max(0.0, z);
    p.fullness = std::max(0.0, -z);
    return model_spectral_balance(p, synth, mapping, cfg);
  };
  const SpectralBalance neutral = model_at(0.0);
  const double centroid_scale = std::max(1e-6, model_at(1.0).centroid - neutral.centroid);
  const double spread_scale = std::max(1e-6, model_at(-1.0).bandwidth - neutral.bandwidth);
  auto cost = [&](double z) {
    const SpectralBalance m = model_at(z);
    const double dc = (measured.centroid - m.centroid) / centroid_scale;
    const double ds = (measured.bandwidth - m.bandwidth) / spread_scale;
    return dc * dc + ds * ds;
  };
  constexpr int kGrid = 40;
  double best_z = 0.0, best_cost = INFINITY;
  for (int i = 0; i <= kGrid; ++i) {
    const double z = -1.0 + 2.0 * i / kGrid;
    const double c = cost(z);
    if (c < best_cost) {
      best_cost = c;
      best_z = z;
    }
  }
  const double step = 2.0 / kGrid;
  double a = std::max(-1.0, best_z - step), b = std::min(1.0, best_z + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = cost(c), fd = cost(d);
  for (int i = 0; i < 30; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = cost(d);
    }
  }
  double z = 0.5 * (a + b);
  if (cost(best_z) < cost(z)) z = best_z;
  params.brightness = std::max(0.0, z);
  params.fullness = std::max(0.0, -z);
  return invert_params(params, mapping);
}

}  // namespace sonicguide
