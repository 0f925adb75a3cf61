#ifndef SONICGUIDE_PROBES_H_
#define SONICGUIDE_PROBES_H_

#include <string_view>
#include <vector>

#include "sonicguide/mapping.h"
#include "sonicguide/synth.h"

namespace sonicguide {

enum class ModulationBand { kNone, kBeats, kRoughness };

std::string_view to_string(ModulationBand band);

// Analysis settings. The STFT uses 4096-sample Hann windows with 75% overlap,
// zero-padded to 8192 points: about 85 ms of time resolution and 12 Hz of
// main-lobe half width at 48 kHz.
struct ProbeConfig {
  int window = 4096;
  int hop = 1024;
  int fft_size = 8192;
  double settle_time = 0.15;      // skipped at the start of every analysis
  double silence_dbfs = -60.0;    // RMS below this raises NoSignalError
  double min_duration = 1.0;      // seconds
  double depth_threshold = 0.02;  // smallest AM depth reported as present
  int chroma_lag = 4;             // frames between correlated spectra
  double chroma_max_rate = 3.0;   // oct/s searched either way
  double chroma_lo = 200.0;       // Hz, log-frequency grid used for chroma
  double chroma_hi = 12000.0;
  int chroma_bins_per_octave = 600;
  double beat_lo = 0.1;           // Hz, beat search band
  double beat_hi = 12.0;
  double roughness_lo = 40.0;     // Hz, roughness search band
  double roughness_hi = 100.0;
  double roughness_split = 350.0; // Hz, roughness envelope ignores content below
  double spectrum_lo = 20.0;      // Hz, spectral balance range
  double spectrum_hi = 20000.0;

  void validate() const;
};

struct AmEstimate {
  double rate = 0.0;   // Hz
  double depth = 0.0;  // peak-to-trough over peak, the synth's depth convention
  ModulationBand band = ModulationBand::kNone;
};

// Best fit in each band. A band whose depth is below the threshold is
// reported with band kNone.
struct AmAnalysis {
  AmEstimate beats;
  AmEstimate roughness;

  // The deeper of the two detected bands, or band kNone.
  AmEstimate dominant() const;
};

struct SpectralBalance {
  double centroid = 0.0;   // log2 Hz
  double bandwidth = 0.0;  // standard deviation, octaves
};

struct FeatureFrame {
  double time = 0.0;      // analysis window start, seconds
  double duration = 0.0;  // analysis window length, seconds
  double chroma_rate = 0.0;
  double am_rate = 0.0;
  double am_depth = 0.0;
  double spectral_centroid = 0.0;
  double envelope_bandwidth = 0.0;
  ModulationBand modulation_band = ModulationBand::kNone;
};

// All estimators throw ValidationError for audio shorter than min_duration
// and NoSignalError when the RMS is below silence_dbfs. They are pure and
// reentrant.

// Signed octaves per second; positive when pitch rises.
double estimate_chroma_rate(const AudioBlock& audio, const ProbeConfig& cfg = {});

AmAnalysis analyze_am(const AudioBlock& audio, const ProbeConfig& cfg = {});
AmEstimate estimate_am(const AudioBlock& audio, const ProbeConfig& cfg = {});

// Centroid and spread of the time-averaged power spectrum in log2 frequency.
SpectralBalance estimate_spectral_balance(const AudioBlock& audio,
                                          const ProbeConfig& cfg = {});

FeatureFrame extract_features(const AudioBlock& audio, const ProbeConfig& cfg = {});

// Sliding analysis: one frame per `hop_seconds`, each over `window_seconds`.
std::vector<FeatureFrame> extract_feature_frames(const AudioBlock& audio,
                                                 double window_seconds, double hop_seconds,
                                                 const ProbeConfig& cfg = {});

// Expected estimate_spectral_balance output for a steady rendering of
// `params`, averaged over the chroma phase. Computed from the envelope, the
// modulation sidebands and the analysis window, without synthesizing audio.
SpectralBalance model_spectral_balance(const SonificationParams& params,
                                       const SynthConfig& synth,
                                       const MappingConfig& mapping,
                                       const ProbeConfig& cfg = {});

// Position estimate from a steady rendering. Throws AmbiguityError when both
// modulation bands are present, plus the estimator errors above.
DisplacementVector decode_position(const AudioBlock& audio, const MappingConfig& mapping,
                                   const SynthConfig& synth = {},
                                   const ProbeConfig& cfg = {});

}  // namespace sonicguide

#endif  // SONICGUIDE_PROBES_H_
