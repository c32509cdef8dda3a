#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kanto/kspec.hpp"
#include "kanto/parameters.hpp"
#include "kanto/project.hpp"
#include "kanto/segmentation.hpp"

namespace kanto {

/// Pipeline stages in order; each requires the previous one.
enum class Stage { built, segmented, embedded, clustered };

const char* to_string(Stage s) noexcept;
Stage stage_from_string(const std::string& s);

enum class RecordStatus { pending, segmented, zero_units, failed };
enum class LabelSource { automatic, human };

const char* to_string(RecordStatus s) noexcept;
const char* to_string(LabelSource s) noexcept;

struct VocalisationRecord {
  AnnotationMeta meta;
  RecordStatus status = RecordStatus::pending;
  std::optional<UnitSegmentation> segmentation;
  std::string spectrogram_ref;                  // relative to the project root
  std::vector<std::string> unit_spectrogram_refs;
  std::optional<int> cluster_label;             // -1 = noise
  LabelSource label_source = LabelSource::automatic;
  std::optional<std::string> song_type;

  bool operator==(const VocalisationRecord&) const = default;
};

struct RecordFailure {
  std::string id;
  std::string message;

  bool operator==(const RecordFailure&) const = default;
};

/// Owner of one feature or embedding row. `unit_index` is -1 for song rows.
struct RowOwner {
  std::string song_id;
  std::int64_t unit_index = -1;
  std::string individual_id;
  int year = 0;

  bool operator==(const RowOwner&) const = default;
};

/// Embedded rows for one clustering group (an individual, or everything).
struct EmbeddingTable {
  std::string individual_id;  // empty for the global table
  std::string method;         // "pca" | "neighbor"
  std::vector<RowOwner> owners;
  FloatMatrix values;         // owners.size() x dim

  bool operator==(const EmbeddingTable&) const = default;
};

/// In-memory view of a persisted dataset revision.
struct Dataset {
  ProjectDirs dirs;
  Parameters params;
  Stage stage = Stage::built;
  std::uint64_t revision = 0;  // 0: never saved
  std::optional<std::uint64_t> reviewed_revision;
  std::vector<VocalisationRecord> records;  // sorted by id
  std::vector<RecordFailure> failures;
  bool song_level_embedding = true;
  std::vector<EmbeddingTable> embeddings;       // one per individual, sorted
  std::optional<EmbeddingTable> global_embedding;
  std::map<std::string, std::string> checksums;  // artefact path -> sha256

  const VocalisationRecord* find(const std::string& id) const;
  VocalisationRecord* find(const std::string& id);
  std::vector<std::string> individuals() const;
};

inline constexpr int kDatasetFormatVersion = 1;

/// Throws ErrorCode::state with a "run X first" message if `ds` has not
/// reached `required`.
void require_stage(const Dataset& ds, Stage required);

/// One record per catalogue entry whose WAV is readable and matches the
/// parameters; everything else is reported in `failures`.
Dataset build_dataset(const ProjectDirs& dirs, const std::vector<AnnotationMeta>& catalogue,
                      const Parameters& p, std::size_t threads = 1);

/// Spectrogram, segmentation and unit slices for every record; writes the
/// `.kspec` payloads under `dirs.spectrograms`.
Dataset segment_all(const Dataset& ds, const Parameters& p, std::size_t threads = 1);

/// Rows grouped for embedding and clustering.
struct FeatureGroup {
  std::string individual_id;  // empty for a global group
  std::size_t bands = 0;
  std::size_t pad_frames = 0;
  std::vector<RowOwner> owners;
  FloatMatrix rows;
};

/// Unit rows (song_level false) or per-song means of padded units (true),
/// padded to each individual's longest unit. Throws ErrorCode::state if the
/// dataset is not segmented.
std::vector<FeatureGroup> get_units(const Dataset& ds, const Parameters& p, std::size_t threads = 1);

/// Same rows as get_units but one group padded to the longest unit overall.
FeatureGroup get_units_global(const Dataset& ds, const Parameters& p, std::size_t threads = 1);

/// Writes manifest, records and embeddings and returns the new revision.
/// The previous manifest is kept under `history/`. `mark_reviewed` records
/// the new revision as the latest reviewed snapshot.
Dataset save_dataset(Dataset ds, bool mark_reviewed = false);

/// Loads the current revision. Throws ErrorCode::checksum naming the file on
/// any mismatch, ErrorCode::unsupported_version for another format version
/// and ErrorCode::state if no dataset exists.
Dataset load_dataset(const ProjectDirs& dirs);

bool dataset_exists(const ProjectDirs& dirs);

/// Serialised records table (JSON Lines, fixed key order).
std::string records_to_jsonl(const std::vector<VocalisationRecord>& records);
std::vector<VocalisationRecord> records_from_jsonl(const std::string& text);

struct ExportSummary {
  std::size_t train = 0;
  std::size_t test = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // "<ind>_<label>" -> (train, test)
};

/// Writes output/{train,test}/<individual>_<label>/<id>.kspec, stratified per
/// (individual, label) and deterministic for a seed. Noise records and
/// records without units are excluded. Throws ErrorCode::state listing any
/// unlabelled records and ErrorCode::validation for a fraction outside (0, 1).
ExportSummary export_training_set(const Dataset& ds, double split_fraction, std::uint64_t seed);

/// Loads a record's song spectrogram.
FloatMatrix load_record_spectrogram(const Dataset& ds, const VocalisationRecord& rec);

}  // namespace kanto
