#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kanto {

/// Every tunable signal, segmentation and clustering setting.
///
/// Lengths are in samples, frequencies in Hz, durations in seconds, levels in
/// dB relative to the spectrogram maximum. When `min_cluster_size` is unset
/// the clusterer uses max(5, 1% of the rows it is given).
struct Parameters {
  int sample_rate_hz = 22050;
  std::size_t window_length = 1024;
  std::size_t hop_length = 128;
  std::size_t fft_size = 1024;
  std::size_t num_mel_bands = 224;
  double lowcut_hz = 500.0;
  double highcut_hz = 10000.0;
  double top_db = 65.0;
  double silence_threshold_db = -25.0;
  double min_unit_duration_s = 0.02;
  double max_unit_duration_s = 0.4;
  double min_silence_duration_s = 0.02;
  double dereverb_strength = 0.0;
  std::size_t dereverb_history_frames = 4;
  bool song_level = true;
  std::size_t embed_dim = 10;
  std::optional<std::size_t> min_cluster_size;

  bool operator==(const Parameters&) const = default;
};

struct ParameterViolation {
  std::vector<std::string> fields;
  std::string message;
};

/// Returns every violated invariant; an empty result means the set is usable.
std::vector<ParameterViolation> validate_parameters(const Parameters& p);

/// Resolves the clustering size for a group of `rows` points.
std::size_t effective_min_cluster_size(const Parameters& p, std::size_t rows);

/// Canonical JSON document with keys in declaration order.
std::string parameters_to_json(const Parameters& p, int indent = 2);

/// Parses a parameters document. Missing keys keep their defaults; unknown
/// keys or mistyped values raise ErrorCode::validation, malformed JSON
/// ErrorCode::parse.
Parameters parameters_from_json(std::string_view text);

Parameters load_parameters(const std::filesystem::path& path);
void save_parameters(const Parameters& p, const std::filesystem::path& path);

}  // namespace kanto
