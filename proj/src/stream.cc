#include "sonicguide/stream.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sonicguide/error.h"

namespace sonicguide {

StreamRenderer::StreamRenderer(const SynthConfig& synth, const MappingConfig& mapping,
                               Mode mode, bool earcons)
    : synth_(synth), mapping_(mapping), mode_(mode), earcons_(earcons) {
  synth_.validate();
  mapping_.validate();
  synth_state_ = init_synth(synth_);
  click_ = render_earcon(EarconKind::kClick, synth_).frames;
  triad_ = render_earcon(EarconKind::kTriad, synth_).frames;
}

std::optional<double> StreamRenderer::last_time() const {
  if (history_.size() == history_start_) return std::nullopt;
  return history_.back().t;
}

void StreamRenderer::push(double t, const DisplacementVector& d) {
  if (end_frame_) throw ValidationError("stream already finished");
  if (!std::isfinite(t)) throw ValidationError("position time must be finite");
  if (!d.finite()) throw ValidationError("position must be finite");
  if (const auto last = last_time(); last && !(t > *last))
    throw ValidationError("position times must be strictly increasing");
  TrajectorySample s{t, d};
  if (mode_ == Mode::k2D) s.d.z = 0.0f;
  history_.push_back(s);
}

void StreamRenderer::finish(double end_time) {
  if (end_frame_) return;
  // Audio already handed out is never taken back.
  end_frame_ = std::max<std::int64_t>(block_index_ * synth_.block_size,
                                      std::llround(end_time * synth_.sample_rate));
}

void StreamRenderer::reconfigure(const MappingConfig& mapping, Mode mode) {
  mapping.validate();
  mapping_ = mapping;
  mode_ = mode;
}

double StreamRenderer::next_block_time() const {
  return static_cast<double>(block_index_ * synth_.block_size) / synth_.sample_rate;
}

void StreamRenderer::start_voice(const std::vector<float>* wave) {
  auto slot = std::find_if(voices_.begin(), voices_.end(),
                           [](const Voice& v) { return v.wave == nullptr; });
  if (slot == voices_.end()) {
    // Steal the voice that has played longest.
    slot = std::max_element(voices_.begin(), voices_.end(),
                            [](const Voice& a, const Voice& b) { return a.pos < b.pos; });
  }
  *slot = Voice{wave, 0};
}

std::size_t StreamRenderer::render_next(std::span<float> out, EventSet& events) {
  events = {};
  const std::int64_t start_frame = block_index_ * synth_.block_size;
  const double t = next_block_time();
  std::size_t frames = static_cast<std::size_t>(synth_.block_size);
  if (end_frame_) {
    if (start_frame >= *end_frame_) return 0;
    frames = static_cast<std::size_t>(
        std::min<std::int64_t>(synth_.block_size, *end_frame_ - start_frame));
  } else if (!last_time() ||
             !(static_cast<double>(start_frame + synth_.block_size) / synth_.sample_rate <=
               *last_time())) {
    return 0;
  }
  if (history_.size() == history_start_) {
    // Finished without any position: hold the origin.
    history_.push_back({0.0, DisplacementVector{}});
  }

  // Keep only the sample at or before t and everything after it.
  while (history_.size() - history_start_ >= 2 && history_[history_start_ + 1].t <= t)
    ++history_start_;
  if (history_start_ > 64) {
    history_.erase(history_.begin(), history_.begin() + history_start_);
    history_start_ = 0;
  }
  const std::span<const TrajectorySample> live(history_.data() + history_start_,
                                               history_.size() - history_start_);
  const DisplacementVector d = position_at(live, t);

  if (block_index_ == 0) {
    crossing_ = init_crossing_state(d, mapping_);
  } else {
    events = detect_crossings(d, crossing_, mapping_, mode_);
    if (earcons_) {
      for (int i = 0; i < events.count; ++i) {
        if (events.kinds[i] == EarconKind::kClick) start_voice(&click_);
        if (events.kinds[i] == EarconKind::kTriad) start_voice(&triad_);
      }
    }
  }

  const SonificationParams params = map_position(d, mapping_);
  const std::span<float> block = out.first(frames);
  render_block(synth_state_, params, synth_, mapping_, block);

  for (auto& voice : voices_) {
    if (voice.wave == nullptr) continue;
    const std::size_t n = std::min(frames, voice.wave->size() - voice.pos);
    for (std::size_t i = 0; i < n; ++i) block[i] += (*voice.wave)[voice.pos + i];
    voice.pos += n;
    if (voice.pos >= voice.wave->size()) voice = Voice{};
  }
  for (float& v : block) v = soft_clip(v);

  ++block_index_;
  return frames;
}

StreamRender render_stream(std::span<const TrajectorySample> positions,
                           const SynthConfig& synth, const MappingConfig& mapping,
                           Mode mode, std::optional<double> duration, bool earcons) {
  if (positions.empty()) throw ValidationError("render_stream needs at least one position");
  StreamRenderer renderer(synth, mapping, mode, earcons);
  for (const auto& p : positions) renderer.push(p.t, p.d);
  const double end = duration.value_or(positions.back().t);
  if (!(end >= 0.0) || !std::isfinite(end)) throw ValidationError("duration must be >= 0");
  renderer.finish(end);

  StreamRender result;
  result.audio.sample_rate = synth.sample_rate;
  result.audio.frames.resize(static_cast<std::size_t>(std::llround(end * synth.sample_rate)));
  std::vector<float> block(synth.block_size);
  EventSet events;
  std::size_t pos = 0;
  while (true) {
    const double t = renderer.next_block_time();
    const std::size_t n = renderer.render_next(block, events);
    if (n == 0) break;
    std::copy_n(block.begin(), n, result.audio.frames.begin() + pos);
    pos += n;
    for (int i = 0; i < events.count; ++i) result.events.push_back({events.kinds[i], t});
  }
  return result;
}

}  // namespace sonicguide
