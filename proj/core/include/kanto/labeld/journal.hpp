#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kanto::labeld {

enum class EditKind { relabel, merge_clusters, mark_noise, split_assign };

const char* to_string(EditKind k) noexcept;
EditKind edit_kind_from_string(const std::string& s);

struct ClusterRef {
  std::string individual_id;
  int label = 0;

  bool operator==(const ClusterRef&) const = default;
};

/// One human labelling decision.
///
///  relabel        songs and/or whole clusters -> new_label
///  merge_clusters every member of each source cluster -> new_label, which
///                 must be an existing cluster of the same individual
///  mark_noise     songs and/or whole clusters -> -1
///  split_assign   selected songs of one cluster -> new_label
struct LabelEdit {
  EditKind kind = EditKind::relabel;
  std::vector<std::string> song_ids;
  std::vector<ClusterRef> clusters;
  int new_label = -1;
  std::string editor;
  std::string timestamp;

  bool operator==(const LabelEdit&) const = default;
};

/// Body format: {"kind", "targets": [song id | {"individual", "label"}],
/// "new_label", "editor", "timestamp"}. Throws ErrorCode::parse for malformed
/// JSON and ErrorCode::validation for a structurally invalid edit.
LabelEdit edit_from_json(std::string_view text);
std::string edit_to_json(const LabelEdit& e);

/// Append-only JSON Lines log of edits made against one dataset revision.
///
/// The first line is a header naming that revision. append() returns only
/// after the line has reached the disk.
class Journal {
 public:
  /// Opens or creates the journal. A new file gets `base_revision` in its
  /// header.
  Journal(std::filesystem::path path, std::uint64_t base_revision);

  const std::filesystem::path& path() const { return path_; }
  std::uint64_t base_revision() const { return base_revision_; }
  std::size_t size() const { return count_; }

  /// Index of the appended entry (0-based).
  std::size_t append(const LabelEdit& e);

 private:
  std::filesystem::path path_;
  std::uint64_t base_revision_ = 0;
  std::size_t count_ = 0;
};

struct JournalContents {
  std::uint64_t base_revision = 0;
  std::vector<LabelEdit> edits;
  bool torn_tail = false;  // an incomplete last line was ignored
};

/// Reads a journal. A final line without its newline was never acknowledged
/// and is skipped; any other malformed line raises ErrorCode::parse.
std::optional<JournalContents> read_journal(const std::filesystem::path& path);

}  // namespace kanto::labeld
