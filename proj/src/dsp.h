#ifndef SONICGUIDE_SRC_DSP_H_
#define SONICGUIDE_SRC_DSP_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sonicguide::dsp {

std::size_t next_pow2(std::size_t n);

// Periodic Hann window (w[0] = 0, symmetric about n/2).
std::vector<double> hann(std::size_t n);

double rms(std::span<const float> x);

// Power spectra |X_k|^2, k = 0..fft_size/2, of Hann-windowed frames taken
// every `hop` samples starting at `offset`. Frames that would run past the
// end are dropped.
struct Spectrogram {
  std::size_t fft_size = 0;
  double bin_hz = 0.0;
  std::vector<std::vector<double>> frames;
};

Spectrogram power_spectrogram(std::span<const float> x, double sample_rate,
                              std::size_t offset, std::size_t window, std::size_t hop,
                              std::size_t fft_size);

// |z|^2 where z is the analytic signal of x with everything below `lo` Hz
// removed.
std::vector<double> analytic_power(std::span<const float> x, double sample_rate,
                                   double lo = 0.0);

// |z|^2 of the analytic signal of x keeping, frame by frame, only partials
// above the first inter-octave gap at or over `floor` Hz. The gap sits half an
// octave from the frame's dominant pitch chroma, so octave-spaced partials are
// never split from their own modulation sidebands. Short-time filtering uses
// square-root Hann windows of `window` samples at 75% overlap.
std::vector<double> gap_split_analytic_power(std::span<const float> x, double sample_rate,
                                             double floor, std::size_t window = 2048);

// Zero-phase brickwall filter keeping lo <= |f| <= hi. The signal is mirrored
// at both ends before the transform to keep edge ringing small.
std::vector<double> brickwall(std::span<const double> x, double sample_rate, double lo,
                              double hi);

// Squared magnitude of a Hann window's transform at a frequency offset given
// in cycles per window length, normalized to 1 at zero offset. Large-window
// limit: (sinc(d) / (1 - d^2))^2.
double hann_kernel_power(double cycles_per_window);

}  // namespace sonicguide::dsp

#endif  // SONICGUIDE_SRC_DSP_H_
