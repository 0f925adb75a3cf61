#ifndef SONICGUIDE_WAV_H_
#define SONICGUIDE_WAV_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sonicguide/synth.h"

namespace sonicguide {

enum class WavFormat { kPcm16, kFloat32 };

// Round half away from zero, no dither, saturating. 1.0 maps to 32767.
std::int16_t to_pcm16(float sample);
inline float from_pcm16(std::int16_t v) { return static_cast<float>(v) / 32768.0f; }

// Mono RIFF/WAVE, little endian.
std::vector<std::uint8_t> encode_wav(const AudioBlock& audio, WavFormat format);
AudioBlock decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const AudioBlock& audio, const std::filesystem::path& path,
               WavFormat format = WavFormat::kPcm16);
AudioBlock read_wav(const std::filesystem::path& path);

}  // namespace sonicguide

#endif  // SONICGUIDE_WAV_H_
