#include "kanto/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "io_util.hpp"
#include "kanto/error.hpp"

namespace kanto {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

struct Parsed {
  WavInfo info;
  std::uint16_t format = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

Parsed parse_header(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::parse, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  Parsed out;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw fail("truncated fmt chunk");
      out.format = le16(bytes.data() + body);
      out.info.channels = le16(bytes.data() + body + 2);
      out.info.sample_rate_hz = static_cast<int>(le32(bytes.data() + body + 4));
      out.info.bits_per_sample = le16(bytes.data() + body + 14);
      if (out.format == kFormatExtensible && size >= 26)
        out.format = le16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      out.data_offset = body;
      out.data_size = std::min(size, bytes.size() - body);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  if (out.info.channels <= 0 || out.info.sample_rate_hz <= 0) throw fail("invalid format fields");

  const int bits = out.info.bits_per_sample;
  const bool ok = (out.format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) ||
                  (out.format == kFormatFloat && (bits == 32 || bits == 64));
  if (!ok) throw fail("unsupported sample format");
  const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * out.info.channels;
  out.info.frames = out.data_size / frame_bytes;
  return out;
}

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) return std::bit_cast<float>(le32(p));
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return std::bit_cast<double>(v);
  }
  switch (bits) {
    case 8: return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  // Headers rarely exceed a few hundred bytes but metadata chunks can precede
  // "data", so parse the whole file to stay simple.
  return parse_header(detail::read_binary_file(path), path).info;
}

Audio read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_binary_file(path);
  const Parsed h = parse_header(bytes, path);
  const int channels = h.info.channels;
  const int bits = h.info.bits_per_sample;
  const std::size_t sample_bytes = static_cast<std::size_t>(bits / 8);

  Audio audio;
  audio.sample_rate_hz = h.info.sample_rate_hz;
  audio.samples.resize(h.info.frames);
  const std::uint8_t* data = bytes.data() + h.data_offset;
  for (std::size_t f = 0; f < h.info.frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c)
      acc += decode_sample(data + (f * channels + c) * sample_bytes, h.format, bits);
    audio.samples[f] = static_cast<float>(acc / channels);
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const Audio& audio, WavEncoding encoding) {
  if (audio.sample_rate_hz <= 0) throw Error(ErrorCode::validation, "sample rate must be positive");
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put32(out, 36 + data_size);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, format);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(audio.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate_hz) * (bits / 8));
  put16(out, bits / 8);
  put16(out, bits);
  out += "data";
  put32(out, data_size);
  for (float s : audio.samples) {
    if (encoding == WavEncoding::pcm16) {
      const double clipped = std::clamp(static_cast<double>(s), -1.0, 32767.0 / 32768.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clipped * 32768.0))));
    } else {
      put32(out, std::bit_cast<std::uint32_t>(s));
    }
  }
  detail::write_file_atomic(path, out);
}

}  // namespace kanto
