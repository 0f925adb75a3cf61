#ifndef SONICGUIDE_STREAM_H_
#define SONICGUIDE_STREAM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sonicguide/earcons.h"
#include "sonicguide/mapping.h"
#include "sonicguide/synth.h"
#include "sonicguide/trajectory.h"

namespace sonicguide {

// Turns a growing position timeline into audio blocks.
//
// Block b starts at frame b * block_size. Its control position is the
// piecewise-linear trajectory evaluated at the block start time. A block is
// rendered once the timeline covers its last frame (or the stream is
// finished), so the live stream never runs past the latest position. Events are detected once per block against the previous
// block's control position and are stamped with the block start time.
//
// The offline renderer and the live service both drive this class, which is
// what makes their output bit-identical for the same position log.
class StreamRenderer {
 public:
  StreamRenderer(const SynthConfig& synth, const MappingConfig& mapping,
                 Mode mode = Mode::k3D, bool earcons = true);

  // `t` must be strictly greater than the previous position time. In 2D mode
  // z is forced to zero. Throws ValidationError.
  void push(double t, const DisplacementVector& d);

  // No more positions; the last one is held until `end_time`. An end time
  // inside already rendered audio ends the stream after that audio.
  void finish(double end_time);
  bool finished() const { return end_frame_.has_value(); }

  // New mapping constants and mode, effective from the next rendered block.
  // Throws ValidationError.
  void reconfigure(const MappingConfig& mapping, Mode mode);

  // Renders the next block into `out` (size >= block_size) when its control
  // position is available. Returns the number of frames written (0 when the
  // stream has to wait for input, or is exhausted after finish()).
  std::size_t render_next(std::span<float> out, EventSet& events);

  double next_block_time() const;
  std::int64_t blocks_rendered() const { return block_index_; }
  const SynthState& synth_state() const { return synth_state_; }
  const SynthConfig& synth_config() const { return synth_; }
  const MappingConfig& mapping_config() const { return mapping_; }
  Mode mode() const { return mode_; }
  std::optional<double> last_time() const;

 private:
  struct Voice {
    const std::vector<float>* wave = nullptr;
    std::size_t pos = 0;
  };

  void start_voice(const std::vector<float>* wave);

  SynthConfig synth_;
  MappingConfig mapping_;
  Mode mode_;
  bool earcons_;
  SynthState synth_state_;
  CrossingState crossing_;
  std::vector<float> click_;
  std::vector<float> triad_;
  std::array<Voice, 8> voices_{};
  std::vector<TrajectorySample> history_;
  std::size_t history_start_ = 0;
  std::int64_t block_index_ = 0;
  std::optional<std::int64_t> end_frame_;
};

struct StreamRender {
  AudioBlock audio;
  std::vector<EarconEvent> events;
};

// Offline render of a whole timeline. Output length is round(duration * sr)
// where duration defaults to the last sample time. Throws ValidationError on
// an empty or non-increasing timeline.
StreamRender render_stream(std::span<const TrajectorySample> positions,
                           const SynthConfig& synth, const MappingConfig& mapping,
                           Mode mode = Mode::k3D,
                           std::optional<double> duration = std::nullopt,
                           bool earcons = true);

}  // namespace sonicguide

#endif  // SONICGUIDE_STREAM_H_
