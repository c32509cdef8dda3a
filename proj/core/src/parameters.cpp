#include "kanto/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "io_util.hpp"
#include "json.hpp"
#include "kanto/error.hpp"

namespace kanto {

using ordered_json = nlohmann::ordered_json;

std::vector<ParameterViolation> validate_parameters(const Parameters& p) {
  std::vector<ParameterViolation> out;
  auto add = [&out](std::vector<std::string> fields, std::string message) {
    out.push_back({std::move(fields), std::move(message)});
  };

  if (p.sample_rate_hz <= 0) add({"sample_rate_hz"}, "sample_rate_hz must be positive");
  if (p.hop_length == 0) add({"hop_length"}, "hop_length must be positive");
  if (p.hop_length > p.window_length)
    add({"hop_length", "window_length"}, "hop_length must not exceed window_length");
  if (p.window_length > p.fft_size)
    add({"window_length", "fft_size"}, "window_length must not exceed fft_size");
  if (p.num_mel_bands == 0) add({"num_mel_bands"}, "num_mel_bands must be positive");
  if (!(p.lowcut_hz >= 0.0)) add({"lowcut_hz"}, "lowcut_hz must be non-negative");
  if (!(p.lowcut_hz < p.highcut_hz))
    add({"lowcut_hz", "highcut_hz"}, "lowcut_hz must be below highcut_hz");
  if (p.sample_rate_hz > 0 && p.highcut_hz > p.sample_rate_hz / 2.0)
    add({"highcut_hz", "sample_rate_hz"}, "highcut_hz must not exceed the Nyquist frequency");
  if (!(p.top_db > 0.0)) add({"top_db"}, "top_db must be positive");
  if (!(p.silence_threshold_db < 0.0))
    add({"silence_threshold_db"}, "silence_threshold_db must be negative");
  if (!(p.min_unit_duration_s > 0.0))
    add({"min_unit_duration_s"}, "min_unit_duration_s must be positive");
  if (!(p.max_unit_duration_s > p.min_unit_duration_s))
    add({"max_unit_duration_s", "min_unit_duration_s"},
        "max_unit_duration_s must exceed min_unit_duration_s");
  if (!(p.min_silence_duration_s >= 0.0))
    add({"min_silence_duration_s"}, "min_silence_duration_s must be non-negative");
  if (!(p.dereverb_strength >= 0.0 && p.dereverb_strength <= 1.0))
    add({"dereverb_strength"}, "dereverb_strength must lie in [0, 1]");
  if (p.embed_dim == 0) add({"embed_dim"}, "embed_dim must be positive");
  if (p.min_cluster_size && *p.min_cluster_size < 2)
    add({"min_cluster_size"}, "min_cluster_size must be at least 2");
  return out;
}

std::size_t effective_min_cluster_size(const Parameters& p, std::size_t rows) {
  if (p.min_cluster_size) return *p.min_cluster_size;
  return std::max<std::size_t>(5, (rows + 99) / 100);
}

namespace {

ordered_json to_ordered(const Parameters& p) {
  ordered_json j;
  j["sample_rate_hz"] = p.sample_rate_hz;
  j["window_length"] = p.window_length;
  j["hop_length"] = p.hop_length;
  j["fft_size"] = p.fft_size;
  j["num_mel_bands"] = p.num_mel_bands;
  j["lowcut_hz"] = p.lowcut_hz;
  j["highcut_hz"] = p.highcut_hz;
  j["top_db"] = p.top_db;
  j["silence_threshold_db"] = p.silence_threshold_db;
  j["min_unit_duration_s"] = p.min_unit_duration_s;
  j["max_unit_duration_s"] = p.max_unit_duration_s;
  j["min_silence_duration_s"] = p.min_silence_duration_s;
  j["dereverb_strength"] = p.dereverb_strength;
  j["dereverb_history_frames"] = p.dereverb_history_frames;
  j["song_level"] = p.song_level;
  j["embed_dim"] = p.embed_dim;
  if (p.min_cluster_size)
    j["min_cluster_size"] = *p.min_cluster_size;
  else
    j["min_cluster_size"] = nullptr;
  return j;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw Error(ErrorCode::validation, "");
      out = it->template get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw Error(ErrorCode::validation, "");
      out = it->template get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_integer() || it->template get<long long>() < 0)
        throw Error(ErrorCode::validation, "");
      out = it->template get<T>();
    } else {
      if (!it->is_number_integer()) throw Error(ErrorCode::validation, "");
      out = it->template get<T>();
    }
  } catch (const Error&) {
    throw Error(ErrorCode::validation, std::string("parameter '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string parameters_to_json(const Parameters& p, int indent) {
  return to_ordered(p).dump(indent);
}

Parameters parameters_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed parameters document: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::validation, "parameters document must be an object");

  const ordered_json known = to_ordered(Parameters{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::validation, "unknown parameter '" + key + "'");
  }

  Parameters p;
  read_field(j, "sample_rate_hz", p.sample_rate_hz);
  read_field(j, "window_length", p.window_length);
  read_field(j, "hop_length", p.hop_length);
  read_field(j, "fft_size", p.fft_size);
  read_field(j, "num_mel_bands", p.num_mel_bands);
  read_field(j, "lowcut_hz", p.lowcut_hz);
  read_field(j, "highcut_hz", p.highcut_hz);
  read_field(j, "top_db", p.top_db);
  read_field(j, "silence_threshold_db", p.silence_threshold_db);
  read_field(j, "min_unit_duration_s", p.min_unit_duration_s);
  read_field(j, "max_unit_duration_s", p.max_unit_duration_s);
  read_field(j, "min_silence_duration_s", p.min_silence_duration_s);
  read_field(j, "dereverb_strength", p.dereverb_strength);
  read_field(j, "dereverb_history_frames", p.dereverb_history_frames);
  read_field(j, "song_level", p.song_level);
  read_field(j, "embed_dim", p.embed_dim);
  if (auto it = j.find("min_cluster_size"); it != j.end() && !it->is_null()) {
    std::size_t mcs = 0;
    read_field(j, "min_cluster_size", mcs);
    p.min_cluster_size = mcs;
  }
  return p;
}

Parameters load_parameters(const std::filesystem::path& path) {
  try {
    return parameters_from_json(detail::read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_parameters(const Parameters& p, const std::filesystem::path& path) {
  detail::write_file_atomic(path, parameters_to_json(p) + "\n");
}

}  // namespace kanto
