#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kanto {

/// Standard project layout. Every path is a descendant of `root`.
struct ProjectDirs {
  std::filesystem::path root;
  std::filesystem::path raw_data;      // root/data/raw
  std::filesystem::path segmented;     // root/data/segmented
  std::filesystem::path spectrograms;  // root/data/spectrograms
  std::filesystem::path output;        // root/output

  bool operator==(const ProjectDirs&) const = default;
};

/// Computes the layout for `root` without touching the filesystem.
ProjectDirs project_dirs(const std::filesystem::path& root);

/// Creates the layout; idempotent. Throws ErrorCode::permission if `root`
/// cannot be written.
ProjectDirs init_project(const std::filesystem::path& root);

/// Metadata of one annotated recording (one WAV = one song).
struct AnnotationMeta {
  std::string id;
  std::filesystem::path wav_path;  // relative to the project root
  std::string individual_id;
  int year = 0;
  std::string recorded_at;  // ISO-8601 as written in the sidecar
  int sample_rate_hz = 0;
  double length_s = 0.0;
  std::map<std::string, std::string> extra;

  bool operator==(const AnnotationMeta&) const = default;
};

struct IngestReport {
  std::vector<AnnotationMeta> catalogue;  // sorted by id
  std::vector<std::string> warnings;      // e.g. WAVs without a sidecar
};

/// Scans `dirs.raw_data` recursively for `<name>.wav` + `<name>.json` pairs.
///
/// Sidecar keys: ID, individual, datetime, sample_rate, length_s (required),
/// year (optional, else taken from datetime); anything else lands in `extra`.
/// Throws ErrorCode::parse for malformed JSON, ErrorCode::conflict for a
/// duplicate ID and ErrorCode::validation for a sample-rate mismatch or a
/// missing/mistyped key. Every message names the offending file.
IngestReport ingest(const ProjectDirs& dirs);

/// Parses one sidecar document. `source` is used in error messages only.
AnnotationMeta parse_sidecar(const std::string& text, const std::string& source);

/// One JSON object per line, keys in fixed order; deterministic for equal input.
std::string catalogue_to_jsonl(const std::vector<AnnotationMeta>& catalogue);

}  // namespace kanto
