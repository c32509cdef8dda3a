#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "kanto/dataset.hpp"
#include "kanto/labeld/journal.hpp"
#include "kanto/project.hpp"

namespace kanto::labeld {

inline constexpr const char* kServiceVersion = "0.1.0";

struct IndividualSummary {
  std::string id;
  std::size_t song_count = 0;
  std::size_t cluster_count = 0;  // distinct labels >= 0
  std::size_t noise_count = 0;
};

struct ClusterSummary {
  int label = 0;
  std::size_t size = 0;
  std::vector<std::string> exemplar_song_ids;
};

struct ClusterItem {
  std::string song_id;
  std::size_t unit_count = 0;
  LabelSource label_source = LabelSource::automatic;
};

struct ItemPage {
  std::vector<ClusterItem> items;
  std::size_t page = 1;  // 1-based
  std::size_t page_size = 0;
  std::size_t total = 0;
  std::size_t total_pages = 0;
};

/// Applies `e` to the labels of `ds` in place. Throws ErrorCode::not_found
/// for an unknown song or an empty (individual, label) cluster, and
/// ErrorCode::validation for an edit that is inconsistent with the labels.
/// Nothing is modified when it throws.
void apply_edit_to(Dataset& ds, const LabelEdit& e);

/// Journal file that belongs to a project.
std::filesystem::path journal_path(const ProjectDirs& dirs);

/// Folds a pending journal into a new reviewed dataset revision and archives
/// it. Returns the new revision, or nothing if there was nothing to fold.
std::optional<std::uint64_t> compact_journal(const ProjectDirs& dirs);

/// Label-review state for one project: the clustered dataset plus every
/// journalled edit. Reads may run concurrently; edits and exports are
/// serialised.
class LabelService {
 public:
  /// Loads the dataset (must be clustered) and replays the journal.
  explicit LabelService(const ProjectDirs& dirs);

  std::uint64_t revision() const;
  std::size_t journal_size() const;

  std::vector<IndividualSummary> individuals() const;
  /// Throws ErrorCode::not_found for an unknown individual.
  std::vector<ClusterSummary> clusters(const std::string& individual) const;
  /// Throws ErrorCode::not_found for an unknown individual, ErrorCode::validation
  /// for page < 1 or page_size outside [1, 500].
  ItemPage items(const std::string& individual, int label, std::size_t page, std::size_t page_size) const;
  /// Rendered PNG; throws ErrorCode::not_found for an unknown or unsegmented song.
  std::vector<std::uint8_t> spectrogram_png(const std::string& song_id) const;

  /// Validates, journals (durably) and then applies the edit. Returns the
  /// journal index.
  std::size_t apply(const LabelEdit& e);

  /// Writes the reviewed dataset as a new revision and starts an empty
  /// journal. Returns the snapshot revision; with no pending edits the
  /// current reviewed revision is returned unchanged.
  std::uint64_t export_reviewed();

  /// Copy of the current labelled state.
  Dataset snapshot() const;

  /// Called after an edit reaches the journal and before it is applied;
  /// lets tests simulate a crash at that point by throwing.
  std::function<void(std::size_t journal_index)> after_journal_write;

 private:
  mutable std::shared_mutex mutex_;
  Dataset ds_;
  std::unique_ptr<Journal> journal_;
};

}  // namespace kanto::labeld
