#include "dsp.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace sonicguide::dsp {

namespace {

using Complex = std::complex<double>;

}  // namespace

std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 1)); }

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  return w;
}

double rms(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / x.size());
}

Spectrogram power_spectrogram(std::span<const float> x, double sample_rate,
                              std::size_t offset, std::size_t window, std::size_t hop,
                              std::size_t fft_size) {
  Spectrogram out;
  out.fft_size = fft_size;
  out.bin_hz = sample_rate / fft_size;
  const auto w = hann(window);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(fft_size, 0.0);
  std::vector<Complex> spec;
  for (std::size_t start = offset; start + window <= x.size(); start += hop) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = w[i] * x[start + i];
    fft.fwd(spec, frame);
    std::vector<double> power(fft_size / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    out.frames.push_back(std::move(power));
  }
  return out;
}

std::vector<double> analytic_power(std::span<const float> x, double sample_rate, double lo) {
  const std::size_t n = next_pow2(x.size());
  std::vector<Complex> in(n, 0.0), spec, z;
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = x[i];
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  const double bin_hz = sample_rate / n;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = k * bin_hz;
    if (k == 0) {
      spec[k] = lo > 0.0 ? 0.0 : spec[k];
    } else if (k < n / 2) {
      spec[k] = f >= lo ? 2.0 * spec[k] : 0.0;
    } else if (k > n / 2) {
      spec[k] = 0.0;
    } else if (f < lo) {
      spec[k] = 0.0;
    }
  }
  fft.inv(z, spec);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(z[i]);
  return out;
}

std::vector<double> gap_split_analytic_power(std::span<const float> x, double sample_rate,
                                             double floor, std::size_t window) {
  const std::size_t hop = window / 4;
  const std::size_t len = x.size();
  // Pad so every output sample is covered by four frames.
  const std::size_t pad = window;
  std::vector<double> padded(len + 2 * pad + window, 0.0);
  for (std::size_t i = 0; i < len; ++i) padded[pad + i] = x[i];

  std::vector<double> sqrt_hann = hann(window);
  for (double& v : sqrt_hann) v = std::sqrt(v);
  const double bin_hz = sample_rate / window;

  Eigen::FFT<double> fft;
  std::vector<Complex> frame(window), spec, back;
  std::vector<Complex> z(padded.size(), 0.0);
  for (std::size_t start = 0; start + window <= padded.size(); start += hop) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = sqrt_hann[i] * padded[start + i];
    fft.fwd(spec, frame);

    // Power-weighted circular mean of log2 f mod 1.
    double re = 0.0, im = 0.0;
    for (std::size_t k = 1; k < window / 2; ++k) {
      const double f = k * bin_hz;
      if (f < 100.0) continue;
      const double p = std::norm(spec[k]);
      const double angle = 2.0 * std::numbers::pi * std::log2(f);
      re += p * std::cos(angle);
      im += p * std::sin(angle);
    }
    double split = floor;
    if (re != 0.0 || im != 0.0) {
      const double chroma = std::atan2(im, re) / (2.0 * std::numbers::pi);
      const double gap = chroma + 0.5;
      split = std::exp2(gap + std::ceil(std::log2(floor) - gap));
    }

    for (std::size_t k = 0; k < window; ++k) {
      const bool positive = k > 0 && k < window / 2;
      spec[k] = positive && k * bin_hz >= split ? 2.0 * spec[k] : Complex(0.0);
    }
    fft.inv(back, spec);
    for (std::size_t i = 0; i < window; ++i) z[start + i] += sqrt_hann[i] * back[i];
  }
  // Periodic Hann at 75% overlap sums to 2.
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = std::norm(z[pad + i] * 0.5);
  return out;
}

std::vector<double> brickwall(std::span<const double> x, double sample_rate, double lo,
                              double hi) {
  const std::size_t len = x.size();
  if (len == 0) return {};
  // [reversed x | x | reversed x]
  std::vector<double> ext;
  ext.reserve(3 * len);
  ext.insert(ext.end(), x.rbegin(), x.rend());
  ext.insert(ext.end(), x.begin(), x.end());
  ext.insert(ext.end(), x.rbegin(), x.rend());
  const std::size_t n = next_pow2(ext.size());
  ext.resize(n, 0.0);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Complex> spec;
  fft.fwd(spec, ext);
  const double bin_hz = sample_rate / n;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = k * bin_hz;
    if (f < lo || f > hi) spec[k] = 0.0;
  }
  std::vector<double> filtered;
  fft.inv(filtered, spec);
  return {filtered.begin() + len, filtered.begin() + 2 * len};
}

double hann_kernel_power(double d) {
  const double ad = std::abs(d);
  double amp;
  if (ad < 1e-9) {
    amp = 1.0;
  } else if (std::abs(ad - 1.0) < 1e-9) {
    amp = 0.5;
  } else {
    const double sinc = std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
    amp = sinc / (1.0 - d * d);
  }
  return amp * amp;
}

}  // namespace sonicguide::dsp
