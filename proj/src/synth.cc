#include "sonicguide/synth.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "envelope.h"
#include "sonicguide/error.h"

namespace sonicguide {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tone level before master gain. Keeps crest peaks of the widest envelopes
// under the soft-clip knee.
constexpr double kToneLevel = 0.6;

constexpr float kClipKnee = 0.95f;

double wrap_unit(double phase) { return phase - std::floor(phase); }

double one_pole(double current, double target, double alpha) {
  return current + alpha * (target - current);
}

}  // namespace

void SynthConfig::validate() const {
  if (!(sample_rate >= 8000.0) || !std::isfinite(sample_rate))
    throw ValidationError("sample_rate must be >= 8000 Hz");
  if (block_size < 32 || block_size > 4096 ||
      !std::has_single_bit(static_cast<unsigned>(block_size)))
    throw ValidationError("block_size must be a power of two in [32, 4096]");
  if (partial_count < 3 || partial_count > kMaxPartials)
    throw ValidationError("partial_count must lie in [3, 16]");
  for (double v : {base_frequency, envelope_center, envelope_width, smoothing_time,
                   master_gain}) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError("synth envelope, smoothing and gain values must be positive");
  }
}

float PinkNoise::next() {
  // 24 random bits -> uniform [-1, 1).
  const double white = static_cast<double>(rng_() >> 8) * (2.0 / 16777216.0) - 1.0;
  b_[0] = 0.99886 * b_[0] + white * 0.0555179;
  b_[1] = 0.99332 * b_[1] + white * 0.0750759;
  b_[2] = 0.96900 * b_[2] + white * 0.1538520;
  b_[3] = 0.86650 * b_[3] + white * 0.3104856;
  b_[4] = 0.55000 * b_[4] + white * 0.5329522;
  b_[5] = -0.7616 * b_[5] - white * 0.0168980;
  const double pink =
      b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + white * 0.5362;
  b_[6] = white * 0.115926;
  return static_cast<float>(pink * 0.125);
}

float soft_clip(float sample) {
  const float mag = std::abs(sample);
  if (mag <= kClipKnee) return sample;
  const float headroom = 1.0f - kClipKnee;
  const float shaped = kClipKnee + headroom * std::tanh((mag - kClipKnee) / headroom);
  // tanh rounds to 1 in float well before the input gets large.
  return std::copysign(std::min(shaped, std::nextafter(1.0f, 0.0f)), sample);
}

SynthState init_synth(const SynthConfig& cfg) {
  cfg.validate();
  SynthState state;
  state.partial_count = cfg.partial_count;
  state.noise = PinkNoise(cfg.noise_seed);
  return state;
}

void render_block(SynthState& state, const SonificationParams& target,
                  const SynthConfig& cfg, const MappingConfig& mapping,
                  std::span<float> out) {
  const double sr = cfg.sample_rate;
  const double inv_sr = 1.0 / sr;
  const double alpha = 1.0 - std::exp(-1.0 / (cfg.smoothing_time * sr));
  const int count = state.partial_count;
  const double log_base_rel = std::log2(cfg.base_frequency / cfg.envelope_center);
  const double rough_inc = mapping.roughness_rate * inv_sr;

  SonificationParams& s = state.smoothed;
  auto& phases = state.partial_phases;

  for (float& sample : out) {
    s.chroma_velocity = one_pole(s.chroma_velocity, target.chroma_velocity, alpha);
    s.beat_rate = one_pole(s.beat_rate, target.beat_rate, alpha);
    s.beat_depth = one_pole(s.beat_depth, target.beat_depth, alpha);
    s.roughness_depth = one_pole(s.roughness_depth, target.roughness_depth, alpha);
    s.brightness = one_pole(s.brightness, target.brightness, alpha);
    s.fullness = one_pole(s.fullness, target.fullness, alpha);
    s.noise_gain = one_pole(s.noise_gain, target.noise_gain, alpha);

    state.chroma_phase += s.chroma_velocity * inv_sr;
    // A wrap renames slots: whatever sat in slot k now sits one octave away.
    while (state.chroma_phase >= 1.0) {
      state.chroma_phase -= 1.0;
      for (int k = count - 1; k > 0; --k) phases[k] = phases[k - 1];
      phases[0] = 0.0;
    }
    while (state.chroma_phase < 0.0) {
      state.chroma_phase += 1.0;
      for (int k = 0; k + 1 < count; ++k) phases[k] = phases[k + 1];
      phases[count - 1] = 0.0;
    }

    const double chroma_freq = cfg.base_frequency * std::exp2(state.chroma_phase);
    const double center = s.brightness * mapping.brightness_octave_shift_max;
    const double half_width =
        cfg.envelope_width + s.fullness * mapping.fullness_bandwidth_max;

    double tone = 0.0;
    double power = 0.0;
    double freq = chroma_freq;
    for (int k = 0; k < count; ++k, freq *= 2.0) {
      const double position = k + state.chroma_phase;
      const double u = log_base_rel + position - center;
      const double amp =
          detail::partial_gain(u, half_width, position, count, freq, sr);
      phases[k] = wrap_unit(phases[k] + freq * inv_sr);
      if (amp > 0.0) {
        tone += amp * std::sin(kTwoPi * phases[k]);
        power += amp * amp;
      }
    }
    if (power > 1e-12) tone *= kToneLevel / std::sqrt(power);

    state.beat_phase = wrap_unit(state.beat_phase + s.beat_rate * inv_sr);
    state.roughness_phase = wrap_unit(state.roughness_phase + rough_inc);
    const double beat_gain =
        1.0 - s.beat_depth * 0.5 * (1.0 - std::cos(kTwoPi * state.beat_phase));
    const double rough_gain =
        1.0 - s.roughness_depth * 0.5 * (1.0 - std::cos(kTwoPi * state.roughness_phase));

    const double noise = s.noise_gain * state.noise.next();
    const double mixed = cfg.master_gain * (tone * beat_gain * rough_gain + noise);
    sample = soft_clip(static_cast<float>(mixed));
  }
}

AudioBlock render_block(SynthState& state, const SonificationParams& target,
                        const SynthConfig& cfg, const MappingConfig& mapping) {
  AudioBlock block{cfg.sample_rate, std::vector<float>(cfg.block_size)};
  render_block(state, target, cfg, mapping, block.frames);
  return block;
}

AudioBlock render_steady(const SonificationParams& params, double seconds,
                         const SynthConfig& cfg, const MappingConfig& mapping) {
  validate(params);
  mapping.validate();
  if (!(seconds >= 0.0)) throw ValidationError("duration must be >= 0");
  SynthState state = init_synth(cfg);
  AudioBlock audio{cfg.sample_rate,
                   std::vector<float>(static_cast<std::size_t>(std::lround(seconds * cfg.sample_rate)))};
  std::span<float> all(audio.frames);
  for (std::size_t pos = 0; pos < all.size(); pos += cfg.block_size) {
    const std::size_t n = std::min<std::size_t>(cfg.block_size, all.size() - pos);
    render_block(state, params, cfg, mapping, all.subspan(pos, n));
  }
  return audio;
}

}  // namespace sonicguide
