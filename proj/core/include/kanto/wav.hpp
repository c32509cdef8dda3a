#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace kanto {

/// Mono audio; multi-channel files are mixed down by averaging channels.
struct Audio {
  int sample_rate_hz = 0;
  std::vector<float> samples;

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

struct WavInfo {
  int sample_rate_hz = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t frames = 0;
};

enum class WavEncoding { pcm16, float32 };

/// Header only. Throws ErrorCode::io if unreadable, ErrorCode::parse if not a
/// supported RIFF/WAVE file.
WavInfo read_wav_info(const std::filesystem::path& path);

/// PCM 8/16/24/32-bit integer and 32/64-bit float are supported.
Audio read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const Audio& audio,
               WavEncoding encoding = WavEncoding::pcm16);

}  // namespace kanto
