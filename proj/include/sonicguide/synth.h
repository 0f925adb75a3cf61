#ifndef SONICGUIDE_SYNTH_H_
#define SONICGUIDE_SYNTH_H_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sonicguide/mapping.h"

namespace sonicguide {

inline constexpr int kMaxPartials = 16;

struct SynthConfig {
  double sample_rate = 48000.0;
  int block_size = 256;
  int partial_count = 10;          // octave-spaced
  double base_frequency = 16.352;  // C0
  double envelope_center = 523.25;
  double envelope_width = 2.5;     // half-width, octaves
  double smoothing_time = 0.030;   // seconds
  double master_gain = 0.5;
  std::uint32_t noise_seed = 0x5eed1234u;

  void validate() const;
};

// Pink noise: white noise through Kellet's seven-pole weighting,
// about -3 dB/octave from 10 Hz to Nyquist. Output RMS is roughly 0.25.
class PinkNoise {
 public:
  explicit PinkNoise(std::uint32_t seed = 0) : rng_(seed) {}

  float next();

  bool operator==(const PinkNoise&) const = default;

 private:
  std::mt19937 rng_;
  std::array<double, 7> b_{};
};

// Everything the render path mutates. Plain value: copy it to fork a render.
struct SynthState {
  double chroma_phase = 0.0;                      // [0, 1) octave
  int partial_count = 0;
  std::array<double, kMaxPartials> partial_phases{};  // [0, 1) cycles
  double beat_phase = 0.0;
  double roughness_phase = 0.0;
  SonificationParams smoothed;
  PinkNoise noise;

  bool operator==(const SynthState&) const = default;
};

struct AudioBlock {
  double sample_rate = 48000.0;
  std::vector<float> frames;

  double duration() const { return frames.size() / sample_rate; }
};

// Neutral (origin) sound with all phases at zero. Throws ValidationError.
SynthState init_synth(const SynthConfig& cfg);

// Renders `out.size()` frames toward `target`. Infallible and allocation
// free; `target` and both configs must already be validated.
void render_block(SynthState& state, const SonificationParams& target,
                  const SynthConfig& cfg, const MappingConfig& mapping,
                  std::span<float> out);

// Convenience overload rendering one cfg.block_size block.
AudioBlock render_block(SynthState& state, const SonificationParams& target,
                        const SynthConfig& cfg, const MappingConfig& mapping);

// Steady rendering of one parameter frame from a fresh state.
AudioBlock render_steady(const SonificationParams& params, double seconds,
                         const SynthConfig& cfg, const MappingConfig& mapping);

// Identity below 0.95, tanh knee above; |output| < 1.
float soft_clip(float sample);

}  // namespace sonicguide

#endif  // SONICGUIDE_SYNTH_H_
