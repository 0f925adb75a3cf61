#include "sonicguide/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sonicguide/error.h"

namespace sonicguide {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

std::int16_t to_pcm16(float sample) {
  const double scaled = std::lround(static_cast<double>(sample) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

std::vector<std::uint8_t> encode_wav(const AudioBlock& audio, WavFormat format) {
  const bool pcm = format == WavFormat::kPcm16;
  const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
  const auto data_bytes = static_cast<std::uint32_t>(audio.frames.size() * bytes_per_sample);
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * bytes_per_sample);
  put_u16(out, bytes_per_sample);
  put_u16(out, bytes_per_sample * 8);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float v : audio.frames) {
    if (pcm) {
      put_u16(out, static_cast<std::uint16_t>(to_pcm16(v)));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

AudioBlock decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE"))
    throw IoError("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (size > b.size() - body) throw IoError("truncated WAV chunk");
    if (tag_is(b, pos, "fmt ")) {
      if (size < 16) throw IoError("short fmt chunk");
      format = get_u16(b, body);
      channels = get_u16(b, body + 2);
      rate = get_u32(b, body + 4);
      bits = get_u16(b, body + 14);
      if (format == kFormatExtensible && size >= 26) format = get_u16(b, body + 24);
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      if (channels != 1) throw IoError("only mono WAV is supported");
      if (rate == 0) throw IoError("WAV sample rate is zero");
      AudioBlock audio{static_cast<double>(rate), {}};
      if (format == kFormatPcm && bits == 16) {
        audio.frames.resize(size / 2);
        for (std::size_t i = 0; i < audio.frames.size(); ++i)
          audio.frames[i] = from_pcm16(static_cast<std::int16_t>(get_u16(b, body + 2 * i)));
      } else if (format == kFormatFloat && bits == 32) {
        audio.frames.resize(size / 4);
        for (std::size_t i = 0; i < audio.frames.size(); ++i)
          audio.frames[i] = std::bit_cast<float>(get_u32(b, body + 4 * i));
      } else {
        throw IoError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bit)");
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw IoError("WAV file has no data chunk");
}

void write_wav(const AudioBlock& audio, const std::filesystem::path& path, WavFormat format) {
  const auto bytes = encode_wav(audio, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

AudioBlock read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace sonicguide
