#include "kanto/labeld/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "../io_util.hpp"
#include "json.hpp"
#include "kanto/error.hpp"

namespace kanto::labeld {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kJournalFormat = "kanto-journal";

void append_durably(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::io, "cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(ErrorCode::io, "cannot write " + path.string() + ": " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw Error(ErrorCode::io, "cannot sync " + path.string() + ": " + std::strerror(err));
  }
  ::close(fd);
}

LabelEdit edit_from(const ordered_json& j) {
  auto bad = [](const std::string& m) { return Error(ErrorCode::validation, "invalid edit: " + m); };
  if (!j.is_object()) throw bad("expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "kind" && key != "targets" && key != "new_label" && key != "editor" && key != "timestamp")
      throw bad("unknown key '" + key + "'");

  LabelEdit e;
  const auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) throw bad("'kind' must be a string");
  e.kind = edit_kind_from_string(kind->get<std::string>());

  const auto targets = j.find("targets");
  if (targets == j.end() || !targets->is_array() || targets->empty()) throw bad("'targets' must be a non-empty array");
  for (const auto& t : *targets) {
    if (t.is_string()) {
      e.song_ids.push_back(t.get<std::string>());
    } else if (t.is_object() && t.contains("individual") && t.contains("label") && t.size() == 2 &&
               t["individual"].is_string() && t["label"].is_number_integer()) {
      e.clusters.push_back({t["individual"].get<std::string>(), t["label"].get<int>()});
    } else {
      throw bad("each target must be a song id or {\"individual\", \"label\"}");
    }
  }

  const auto label = j.find("new_label");
  if (label != j.end()) {
    if (!label->is_number_integer()) throw bad("'new_label' must be an integer");
    e.new_label = label->get<int>();
  } else if (e.kind != EditKind::mark_noise) {
    throw bad("'new_label' is required for " + std::string(to_string(e.kind)));
  }
  if (e.new_label < -1) throw bad("'new_label' must be >= -1");
  if (e.kind == EditKind::mark_noise) {
    if (e.new_label != -1) throw bad("mark_noise always assigns -1");
  }
  if (e.kind == EditKind::merge_clusters) {
    if (!e.song_ids.empty()) throw bad("merge_clusters targets clusters, not songs");
    if (e.new_label < 0) throw bad("cannot merge into noise; use mark_noise");
    for (const auto& c : e.clusters)
      if (c.label == e.new_label) throw bad("merge source and destination are the same cluster");
  }
  if (e.kind == EditKind::split_assign) {
    if (!e.clusters.empty()) throw bad("split_assign targets songs, not clusters");
    if (e.new_label < 0) throw bad("split_assign needs a cluster label >= 0");
  }

  for (const char* key : {"editor", "timestamp"}) {
    const auto it = j.find(key);
    if (it == j.end()) continue;
    if (!it->is_string()) throw bad(std::string("'") + key + "' must be a string");
    (std::string(key) == "editor" ? e.editor : e.timestamp) = it->get<std::string>();
  }
  return e;
}

}  // namespace

const char* to_string(EditKind k) noexcept {
  switch (k) {
    case EditKind::relabel: return "relabel";
    case EditKind::merge_clusters: return "merge_clusters";
    case EditKind::mark_noise: return "mark_noise";
    case EditKind::split_assign: return "split_assign";
  }
  return "?";
}

EditKind edit_kind_from_string(const std::string& s) {
  if (s == "relabel") return EditKind::relabel;
  if (s == "merge_clusters") return EditKind::merge_clusters;
  if (s == "mark_noise") return EditKind::mark_noise;
  if (s == "split_assign") return EditKind::split_assign;
  throw Error(ErrorCode::validation, "unknown edit kind '" + s + "'");
}

LabelEdit edit_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed edit JSON: ") + e.what());
  }
  return edit_from(j);
}

std::string edit_to_json(const LabelEdit& e) {
  ordered_json j;
  j["kind"] = to_string(e.kind);
  ordered_json targets = ordered_json::array();
  for (const auto& id : e.song_ids) targets.push_back(id);
  for (const auto& c : e.clusters) {
    ordered_json t;
    t["individual"] = c.individual_id;
    t["label"] = c.label;
    targets.push_back(std::move(t));
  }
  j["targets"] = std::move(targets);
  j["new_label"] = e.new_label;
  j["editor"] = e.editor;
  j["timestamp"] = e.timestamp;
  return j.dump();
}

Journal::Journal(fs::path path, std::uint64_t base_revision) : path_(std::move(path)) {
  if (auto existing = read_journal(path_)) {
    base_revision_ = existing->base_revision;
    count_ = existing->edits.size();
    if (existing->torn_tail) {
      // Drop the unacknowledged fragment so later appends start on a fresh line.
      std::string text = detail::read_text_file(path_);
      text.erase(text.rfind('\n') + 1);
      detail::write_file_atomic(path_, text);
    }
    return;
  }
  base_revision_ = base_revision;
  std::error_code ec;
  fs::remove(path_, ec);
  fs::create_directories(path_.parent_path());
  ordered_json header;
  header["format"] = kJournalFormat;
  header["base_revision"] = base_revision;
  append_durably(path_, header.dump() + "\n");
}

std::size_t Journal::append(const LabelEdit& e) {
  append_durably(path_, edit_to_json(e) + "\n");
  return count_++;
}

std::optional<JournalContents> read_journal(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  const std::string text = detail::read_text_file(path);
  JournalContents out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      out.torn_tail = true;
      break;
    }
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    try {
      const auto j = ordered_json::parse(line);
      if (line_no == 1) {
        if (j.value("format", "") != kJournalFormat) throw Error(ErrorCode::parse, "missing journal header");
        out.base_revision = j.at("base_revision").get<std::uint64_t>();
      } else {
        out.edits.push_back(edit_from(j));
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (line_no == 0) {
    // Only a torn header: nothing was ever acknowledged.
    return std::nullopt;
  }
  return out;
}

}  // namespace kanto::labeld
