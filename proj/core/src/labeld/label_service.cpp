#include "kanto/labeld/label_service.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "kanto/error.hpp"
#include "kanto/labeld/png_render.hpp"

namespace kanto::labeld {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kExemplars = 4;
constexpr std::size_t kMaxPageSize = 500;

std::vector<std::size_t> cluster_members(const Dataset& ds, const ClusterRef& c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (r.meta.individual_id == c.individual_id && r.cluster_label == c.label) out.push_back(i);
  }
  return out;
}

// Indices of the records an edit touches; throws without side effects if the
// edit cannot be applied.
std::vector<std::size_t> resolve(const Dataset& ds, const LabelEdit& e) {
  if (e.song_ids.empty() && e.clusters.empty()) throw Error(ErrorCode::validation, "edit has no targets");
  std::set<std::size_t> targets;
  for (const auto& id : e.song_ids) {
    const auto* r = ds.find(id);
    if (!r) throw Error(ErrorCode::not_found, "unknown song '" + id + "'");
    if (r->status != RecordStatus::segmented)
      throw Error(ErrorCode::validation, "song '" + id + "' has no units to label");
    targets.insert(static_cast<std::size_t>(r - ds.records.data()));
  }
  for (const auto& c : e.clusters) {
    const auto members = cluster_members(ds, c);
    if (members.empty())
      throw Error(ErrorCode::not_found,
                  "individual '" + c.individual_id + "' has no cluster " + std::to_string(c.label));
    targets.insert(members.begin(), members.end());
  }

  if (e.kind == EditKind::merge_clusters) {
    if (e.clusters.empty() || !e.song_ids.empty())
      throw Error(ErrorCode::validation, "merge_clusters targets clusters only");
    for (const auto& c : e.clusters) {
      if (c.label == e.new_label) throw Error(ErrorCode::validation, "merge source and destination are the same");
      if (cluster_members(ds, {c.individual_id, e.new_label}).empty())
        throw Error(ErrorCode::validation, "destination cluster " + std::to_string(e.new_label) +
                                               " does not exist for individual '" + c.individual_id + "'");
    }
  }
  if (e.kind == EditKind::split_assign) {
    if (!e.clusters.empty()) throw Error(ErrorCode::validation, "split_assign targets songs only");
    const auto& first = ds.records[*targets.begin()];
    for (std::size_t i : targets) {
      const auto& r = ds.records[i];
      if (r.meta.individual_id != first.meta.individual_id || r.cluster_label != first.cluster_label)
        throw Error(ErrorCode::validation, "split_assign songs must come from one cluster of one individual");
    }
    if (first.cluster_label == e.new_label)
      throw Error(ErrorCode::validation, "split_assign destination equals the source cluster");
  }
  if (e.kind == EditKind::mark_noise && e.new_label != -1)
    throw Error(ErrorCode::validation, "mark_noise always assigns -1");
  if (e.new_label < -1) throw Error(ErrorCode::validation, "labels must be >= -1");
  return {targets.begin(), targets.end()};
}

void assign(Dataset& ds, const std::vector<std::size_t>& targets, int label) {
  for (std::size_t i : targets) {
    ds.records[i].cluster_label = label;
    ds.records[i].label_source = LabelSource::human;
  }
}

fs::path archive_path(const ProjectDirs& dirs, std::uint64_t base) {
  return dirs.segmented / "history" / ("journal." + std::to_string(base) + ".jsonl");
}

void archive_journal(const ProjectDirs& dirs, std::uint64_t base) {
  fs::create_directories(dirs.segmented / "history");
  fs::rename(journal_path(dirs), archive_path(dirs, base));
}

void replay(Dataset& ds, const JournalContents& j) {
  for (std::size_t i = 0; i < j.edits.size(); ++i) {
    try {
      apply_edit_to(ds, j.edits[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::internal, "journal entry " + std::to_string(i) + " no longer applies: " + e.what());
    }
  }
}

}  // namespace

void apply_edit_to(Dataset& ds, const LabelEdit& e) { assign(ds, resolve(ds, e), e.new_label); }

fs::path journal_path(const ProjectDirs& dirs) { return dirs.segmented / "journal.jsonl"; }

std::optional<std::uint64_t> compact_journal(const ProjectDirs& dirs) {
  const auto contents = read_journal(journal_path(dirs));
  if (!contents) return std::nullopt;
  Dataset ds = load_dataset(dirs);
  if (contents->base_revision != ds.revision) {
    // Already folded into a later revision; only the archiving was missed.
    archive_journal(dirs, contents->base_revision);
    return std::nullopt;
  }
  if (contents->edits.empty()) return std::nullopt;
  replay(ds, *contents);
  ds = save_dataset(std::move(ds), true);
  archive_journal(dirs, contents->base_revision);
  return ds.revision;
}

LabelService::LabelService(const ProjectDirs& dirs) {
  ds_ = load_dataset(dirs);
  require_stage(ds_, Stage::clustered);
  const fs::path path = journal_path(dirs);
  if (const auto contents = read_journal(path)) {
    if (contents->base_revision == ds_.revision)
      replay(ds_, *contents);
    else
      archive_journal(dirs, contents->base_revision);
  }
  journal_ = std::make_unique<Journal>(path, ds_.revision);
}

std::uint64_t LabelService::revision() const {
  std::shared_lock lock(mutex_);
  return ds_.revision;
}

std::size_t LabelService::journal_size() const {
  std::shared_lock lock(mutex_);
  return journal_->size();
}

std::vector<IndividualSummary> LabelService::individuals() const {
  std::shared_lock lock(mutex_);
  std::map<std::string, std::pair<IndividualSummary, std::set<int>>> acc;
  for (const auto& r : ds_.records) {
    auto& [s, labels] = acc[r.meta.individual_id];
    s.id = r.meta.individual_id;
    ++s.song_count;
    if (r.cluster_label && *r.cluster_label >= 0) labels.insert(*r.cluster_label);
    if (r.cluster_label && *r.cluster_label == -1) ++s.noise_count;
  }
  std::vector<IndividualSummary> out;
  for (auto& [_, v] : acc) {
    v.first.cluster_count = v.second.size();
    out.push_back(v.first);
  }
  return out;
}

std::vector<ClusterSummary> LabelService::clusters(const std::string& individual) const {
  std::shared_lock lock(mutex_);
  std::map<int, ClusterSummary> acc;
  bool known = false;
  for (const auto& r : ds_.records) {
    if (r.meta.individual_id != individual) continue;
    known = true;
    if (!r.cluster_label) continue;
    auto& c = acc[*r.cluster_label];
    c.label = *r.cluster_label;
    ++c.size;
    if (c.exemplar_song_ids.size() < kExemplars) c.exemplar_song_ids.push_back(r.meta.id);
  }
  if (!known) throw Error(ErrorCode::not_found, "unknown individual '" + individual + "'");
  std::vector<ClusterSummary> out;
  for (auto& [_, c] : acc) out.push_back(std::move(c));
  return out;
}

ItemPage LabelService::items(const std::string& individual, int label, std::size_t page,
                             std::size_t page_size) const {
  if (page < 1) throw Error(ErrorCode::validation, "page must be >= 1");
  if (page_size < 1 || page_size > kMaxPageSize)
    throw Error(ErrorCode::validation, "page_size must lie in [1, " + std::to_string(kMaxPageSize) + "]");
  std::shared_lock lock(mutex_);
  bool known = false;
  std::vector<ClusterItem> all;
  for (const auto& r : ds_.records) {
    if (r.meta.individual_id != individual) continue;
    known = true;
    if (r.cluster_label != label) continue;
    all.push_back({r.meta.id, r.segmentation ? r.segmentation->unit_count() : 0, r.label_source});
  }
  if (!known) throw Error(ErrorCode::not_found, "unknown individual '" + individual + "'");
  ItemPage p;
  p.page = page;
  p.page_size = page_size;
  p.total = all.size();
  p.total_pages = (all.size() + page_size - 1) / page_size;
  const std::size_t begin = std::min(all.size(), (page - 1) * page_size);
  const std::size_t end = std::min(all.size(), begin + page_size);
  p.items.assign(all.begin() + static_cast<std::ptrdiff_t>(begin), all.begin() + static_cast<std::ptrdiff_t>(end));
  return p;
}

std::vector<std::uint8_t> LabelService::spectrogram_png(const std::string& song_id) const {
  FloatMatrix m;
  double floor_db = 0.0;
  {
    std::shared_lock lock(mutex_);
    const auto* r = ds_.find(song_id);
    if (!r) throw Error(ErrorCode::not_found, "unknown song '" + song_id + "'");
    if (r->spectrogram_ref.empty()) throw Error(ErrorCode::not_found, "song '" + song_id + "' has no spectrogram");
    m = load_record_spectrogram(ds_, *r);
    floor_db = -ds_.params.top_db;
  }
  return render_spectrogram_png(m, floor_db);
}

std::size_t LabelService::apply(const LabelEdit& e) {
  std::unique_lock lock(mutex_);
  const auto targets = resolve(ds_, e);
  const std::size_t index = journal_->append(e);
  if (after_journal_write) after_journal_write(index);
  assign(ds_, targets, e.new_label);
  return index;
}

std::uint64_t LabelService::export_reviewed() {
  std::unique_lock lock(mutex_);
  if (journal_->size() == 0 && ds_.reviewed_revision == ds_.revision) return ds_.revision;
  const std::uint64_t base = journal_->base_revision();
  ds_ = save_dataset(ds_, true);
  journal_.reset();
  archive_journal(ds_.dirs, base);
  journal_ = std::make_unique<Journal>(journal_path(ds_.dirs), ds_.revision);
  return ds_.revision;
}

Dataset LabelService::snapshot() const {
  std::shared_lock lock(mutex_);
  return ds_;
}

}  // namespace kanto::labeld
