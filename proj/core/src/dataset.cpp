#include "kanto/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "io_util.hpp"
#include "json_codec.hpp"
#include "kanto/checksum.hpp"
#include "kanto/embed.hpp"
#include "kanto/error.hpp"
#include "kanto/parallel.hpp"
#include "kanto/spectrogram.hpp"
#include "kanto/wav.hpp"

namespace kanto {

namespace fs = std::filesystem;
using detail::ordered_json;

const char* to_string(Stage s) noexcept {
  switch (s) {
    case Stage::built: return "built";
    case Stage::segmented: return "segmented";
    case Stage::embedded: return "embedded";
    case Stage::clustered: return "clustered";
  }
  return "built";
}

Stage stage_from_string(const std::string& s) {
  if (s == "built") return Stage::built;
  if (s == "segmented") return Stage::segmented;
  if (s == "embedded") return Stage::embedded;
  if (s == "clustered") return Stage::clustered;
  throw Error(ErrorCode::parse, "unknown stage '" + s + "'");
}

const char* to_string(RecordStatus s) noexcept {
  switch (s) {
    case RecordStatus::pending: return "pending";
    case RecordStatus::segmented: return "segmented";
    case RecordStatus::zero_units: return "zero_units";
    case RecordStatus::failed: return "failed";
  }
  return "pending";
}

const char* to_string(LabelSource s) noexcept { return s == LabelSource::human ? "human" : "auto"; }

namespace {

RecordStatus status_from_string(const std::string& s) {
  if (s == "pending") return RecordStatus::pending;
  if (s == "segmented") return RecordStatus::segmented;
  if (s == "zero_units") return RecordStatus::zero_units;
  if (s == "failed") return RecordStatus::failed;
  throw Error(ErrorCode::parse, "unknown record status '" + s + "'");
}

const char* command_for(Stage s) {
  switch (s) {
    case Stage::built: return "ingest";
    case Stage::segmented: return "segment";
    case Stage::embedded: return "embed";
    case Stage::clustered: return "cluster";
  }
  return "ingest";
}

std::string rel(const ProjectDirs& dirs, const fs::path& p) {
  return fs::relative(p, dirs.root).generic_string();
}

std::string checksum_bytes(const std::vector<std::uint8_t>& bytes) {
  return sha256_hex(std::span<const std::uint8_t>(bytes));
}

}  // namespace

const VocalisationRecord* Dataset::find(const std::string& id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const VocalisationRecord& r, const std::string& k) { return r.meta.id < k; });
  return it != records.end() && it->meta.id == id ? &*it : nullptr;
}

VocalisationRecord* Dataset::find(const std::string& id) {
  return const_cast<VocalisationRecord*>(std::as_const(*this).find(id));
}

std::vector<std::string> Dataset::individuals() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.meta.individual_id);
  return {ids.begin(), ids.end()};
}

void require_stage(const Dataset& ds, Stage required) {
  if (static_cast<int>(ds.stage) < static_cast<int>(required))
    throw Error(ErrorCode::state, std::string("dataset is at stage '") + to_string(ds.stage) +
                                      "'; run `kanto " + command_for(required) + "` first");
}

Dataset build_dataset(const ProjectDirs& dirs, const std::vector<AnnotationMeta>& catalogue,
                      const Parameters& p, std::size_t threads) {
  if (const auto v = validate_parameters(p); !v.empty())
    throw Error(ErrorCode::validation, "invalid parameters: " + v.front().message);

  const auto checks = par_map(JobSpec<AnnotationMeta>{catalogue, threads}, [&](const AnnotationMeta& m) {
    const WavInfo info = read_wav_info(dirs.root / m.wav_path);
    if (info.sample_rate_hz != p.sample_rate_hz)
      throw Error(ErrorCode::validation, "sample rate " + std::to_string(info.sample_rate_hz) +
                                             " Hz differs from the configured " +
                                             std::to_string(p.sample_rate_hz) + " Hz");
    if (info.frames < p.window_length)
      throw Error(ErrorCode::input_too_short, "recording is shorter than one analysis window");
    return true;
  });

  Dataset ds;
  ds.dirs = dirs;
  ds.params = p;
  ds.stage = Stage::built;
  ds.song_level_embedding = p.song_level;
  for (std::size_t i = 0; i < catalogue.size(); ++i) {
    if (!checks[i].ok()) {
      ds.failures.push_back({catalogue[i].id, checks[i].error});
      continue;
    }
    VocalisationRecord r;
    r.meta = catalogue[i];
    ds.records.push_back(std::move(r));
  }
  std::sort(ds.records.begin(), ds.records.end(),
            [](const auto& a, const auto& b) { return a.meta.id < b.meta.id; });
  return ds;
}

namespace {

struct SegmentOutcome {
  RecordStatus status;
  UnitSegmentation segmentation;
  std::string spectrogram_ref;
  std::vector<std::string> unit_refs;
  std::vector<std::pair<std::string, std::string>> checksums;
};

SegmentOutcome segment_record(const ProjectDirs& dirs, const VocalisationRecord& rec, const Parameters& p) {
  const Audio audio = read_wav(dirs.root / rec.meta.wav_path);
  if (audio.sample_rate_hz != p.sample_rate_hz)
    throw Error(ErrorCode::validation, "sample rate differs from parameters");
  Spectrogram spec = compute_spectrogram(audio.samples, p);
  if (p.dereverb_strength > 0.0) spec = dereverberate(spec, p.dereverb_strength, p.dereverb_history_frames);

  SegmentOutcome out;
  out.segmentation = segment_into_units(spec, p);
  out.status = out.segmentation.unit_count() == 0 ? RecordStatus::zero_units : RecordStatus::segmented;

  const std::string stem = detail::safe_stem(rec.meta.id);
  const fs::path song_path = dirs.spectrograms / (stem + ".kspec");
  const auto song_bytes = encode_kspec(spec.to_matrix());
  detail::write_file_atomic(song_path, std::span<const std::uint8_t>(song_bytes));
  out.spectrogram_ref = rel(dirs, song_path);
  out.checksums.emplace_back(out.spectrogram_ref, checksum_bytes(song_bytes));

  const fs::path unit_dir = dirs.spectrograms / stem;
  std::error_code ec;
  fs::remove_all(unit_dir, ec);
  const auto units = extract_unit_spectrograms(spec, out.segmentation);
  if (!units.empty()) fs::create_directories(unit_dir);
  for (std::size_t i = 0; i < units.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "u%04zu.kspec", i);
    const fs::path path = unit_dir / name;
    const auto bytes = encode_kspec(units[i].to_matrix());
    detail::write_file_atomic(path, std::span<const std::uint8_t>(bytes));
    out.unit_refs.push_back(rel(dirs, path));
    out.checksums.emplace_back(out.unit_refs.back(), checksum_bytes(bytes));
  }
  return out;
}

void erase_record_checksums(Dataset& ds, const VocalisationRecord& r) {
  if (!r.spectrogram_ref.empty()) ds.checksums.erase(r.spectrogram_ref);
  for (const auto& u : r.unit_spectrogram_refs) ds.checksums.erase(u);
}

}  // namespace

Dataset segment_all(const Dataset& ds, const Parameters& p, std::size_t threads) {
  require_stage(ds, Stage::built);
  if (const auto v = validate_parameters(p); !v.empty())
    throw Error(ErrorCode::validation, "invalid parameters: " + v.front().message);
  fs::create_directories(ds.dirs.spectrograms);

  const auto outcomes = par_map(JobSpec<VocalisationRecord>{ds.records, threads},
                                [&](const VocalisationRecord& r) { return segment_record(ds.dirs, r, p); });

  Dataset out = ds;
  out.params = p;
  out.stage = Stage::segmented;
  out.song_level_embedding = p.song_level;
  out.embeddings.clear();
  out.global_embedding.reset();
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    VocalisationRecord& r = out.records[i];
    erase_record_checksums(out, r);
    std::erase_if(out.failures, [&](const RecordFailure& f) { return f.id == r.meta.id; });
    if (!outcomes[i].ok()) {
      r.status = RecordStatus::failed;
      r.segmentation.reset();
      r.spectrogram_ref.clear();
      r.unit_spectrogram_refs.clear();
      out.failures.push_back({r.meta.id, outcomes[i].error});
      continue;
    }
    const SegmentOutcome& o = *outcomes[i].value;
    r.status = o.status;
    r.segmentation = o.segmentation;
    r.spectrogram_ref = o.spectrogram_ref;
    r.unit_spectrogram_refs = o.unit_refs;
    for (const auto& [path, sum] : o.checksums) out.checksums[path] = sum;
  }
  return out;
}

namespace {

using UnitMatrices = std::vector<FloatMatrix>;

std::vector<UnitMatrices> load_units(const Dataset& ds, std::size_t threads) {
  const auto loaded = par_map(JobSpec<VocalisationRecord>{ds.records, threads}, [&](const VocalisationRecord& r) {
    UnitMatrices m;
    if (r.status != RecordStatus::segmented) return m;
    for (const auto& ref : r.unit_spectrogram_refs) m.push_back(read_kspec(ds.dirs.root / ref));
    return m;
  });
  std::vector<UnitMatrices> out(loaded.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (!loaded[i].ok())
      throw Error(ErrorCode::io, "cannot load units of '" + ds.records[i].meta.id + "': " + loaded[i].error);
    out[i] = std::move(*loaded[i].value);
  }
  return out;
}

FeatureGroup build_group(const Dataset& ds, const Parameters& p, const std::vector<std::size_t>& members,
                         const std::vector<UnitMatrices>& units, std::string individual) {
  FeatureGroup g;
  g.individual_id = std::move(individual);
  g.bands = p.num_mel_bands;
  for (std::size_t i : members)
    for (const auto& u : units[i]) g.pad_frames = std::max<std::size_t>(g.pad_frames, u.cols);
  if (g.pad_frames == 0) return g;

  std::vector<Spectrogram> slices;
  std::vector<RowOwner> unit_owners;
  for (std::size_t i : members) {
    const auto& meta = ds.records[i].meta;
    for (std::size_t k = 0; k < units[i].size(); ++k) {
      slices.push_back(spectrogram_from_matrix(units[i][k], p));
      unit_owners.push_back({meta.id, static_cast<std::int64_t>(k), meta.individual_id, meta.year});
    }
  }
  const FloatMatrix flat = pad_and_flatten(slices, g.pad_frames);
  if (!p.song_level) {
    g.owners = std::move(unit_owners);
    g.rows = flat;
    return g;
  }

  const std::size_t width = flat.cols;
  std::size_t row = 0;
  for (std::size_t i : members) {
    const std::size_t count = units[i].size();
    if (count == 0) continue;
    std::vector<double> acc(width, 0.0);
    for (std::size_t k = 0; k < count; ++k, ++row)
      for (std::size_t c = 0; c < width; ++c) acc[c] += flat.values[row * width + c];
    for (double v : acc) g.rows.values.push_back(static_cast<float>(v / static_cast<double>(count)));
    const auto& meta = ds.records[i].meta;
    g.owners.push_back({meta.id, -1, meta.individual_id, meta.year});
  }
  g.rows.rows = static_cast<std::uint32_t>(g.owners.size());
  g.rows.cols = static_cast<std::uint32_t>(width);
  return g;
}

}  // namespace

std::vector<FeatureGroup> get_units(const Dataset& ds, const Parameters& p, std::size_t threads) {
  require_stage(ds, Stage::segmented);
  const auto units = load_units(ds, threads);
  std::map<std::string, std::vector<std::size_t>> by_individual;
  for (std::size_t i = 0; i < ds.records.size(); ++i) by_individual[ds.records[i].meta.individual_id].push_back(i);
  std::vector<FeatureGroup> groups;
  for (const auto& [individual, members] : by_individual)
    groups.push_back(build_group(ds, p, members, units, individual));
  return groups;
}

FeatureGroup get_units_global(const Dataset& ds, const Parameters& p, std::size_t threads) {
  require_stage(ds, Stage::segmented);
  const auto units = load_units(ds, threads);
  std::vector<std::size_t> all(ds.records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return build_group(ds, p, all, units, "");
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

ordered_json segmentation_to_json(const UnitSegmentation& s) {
  ordered_json j;
  j["onsets_s"] = s.onsets_s;
  j["offsets_s"] = s.offsets_s;
  j["unit_durations_s"] = s.unit_durations_s;
  j["silence_durations_s"] = s.silence_durations_s;
  j["flags"] = s.flags;
  return j;
}

UnitSegmentation segmentation_from_json(const ordered_json& j) {
  UnitSegmentation s;
  s.onsets_s = j.at("onsets_s").get<std::vector<double>>();
  s.offsets_s = j.at("offsets_s").get<std::vector<double>>();
  s.unit_durations_s = j.at("unit_durations_s").get<std::vector<double>>();
  s.silence_durations_s = j.at("silence_durations_s").get<std::vector<double>>();
  s.flags = j.at("flags").get<std::vector<std::uint8_t>>();
  return s;
}

ordered_json record_to_json(const VocalisationRecord& r) {
  ordered_json j;
  j["meta"] = detail::meta_to_json(r.meta);
  j["status"] = to_string(r.status);
  j["segmentation"] = r.segmentation ? segmentation_to_json(*r.segmentation) : ordered_json(nullptr);
  j["spectrogram_ref"] = r.spectrogram_ref;
  j["unit_spectrogram_refs"] = r.unit_spectrogram_refs;
  j["cluster_label"] = r.cluster_label ? ordered_json(*r.cluster_label) : ordered_json(nullptr);
  j["label_source"] = to_string(r.label_source);
  j["song_type"] = r.song_type ? ordered_json(*r.song_type) : ordered_json(nullptr);
  return j;
}

VocalisationRecord record_from_json(const ordered_json& j) {
  VocalisationRecord r;
  r.meta = detail::meta_from_json(j.at("meta"));
  r.status = status_from_string(j.at("status").get<std::string>());
  if (!j.at("segmentation").is_null()) r.segmentation = segmentation_from_json(j.at("segmentation"));
  r.spectrogram_ref = j.at("spectrogram_ref").get<std::string>();
  r.unit_spectrogram_refs = j.at("unit_spectrogram_refs").get<std::vector<std::string>>();
  if (!j.at("cluster_label").is_null()) r.cluster_label = j.at("cluster_label").get<int>();
  r.label_source = j.at("label_source").get<std::string>() == "human" ? LabelSource::human : LabelSource::automatic;
  if (!j.at("song_type").is_null()) r.song_type = j.at("song_type").get<std::string>();
  return r;
}

ordered_json owner_to_json(const RowOwner& o) {
  ordered_json j;
  j["song_id"] = o.song_id;
  j["unit_index"] = o.unit_index;
  j["individual_id"] = o.individual_id;
  j["year"] = o.year;
  return j;
}

RowOwner owner_from_json(const ordered_json& j) {
  return {j.at("song_id").get<std::string>(), j.at("unit_index").get<std::int64_t>(),
          j.at("individual_id").get<std::string>(), j.at("year").get<int>()};
}

fs::path manifest_path(const ProjectDirs& d) { return d.segmented / "manifest.json"; }

}  // namespace

std::string records_to_jsonl(const std::vector<VocalisationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<VocalisationRecord> records_from_jsonl(const std::string& text) {
  std::vector<VocalisationRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(ordered_json::parse(line)));
  }
  return out;
}

bool dataset_exists(const ProjectDirs& dirs) { return fs::exists(manifest_path(dirs)); }

Dataset save_dataset(Dataset ds, bool mark_reviewed) {
  const ProjectDirs& d = ds.dirs;
  fs::create_directories(d.segmented);

  std::uint64_t on_disk = 0;
  if (fs::exists(manifest_path(d))) {
    try {
      on_disk = ordered_json::parse(detail::read_text_file(manifest_path(d))).at("revision").get<std::uint64_t>();
    } catch (const std::exception&) {
      on_disk = 0;
    }
    fs::create_directories(d.segmented / "history");
    fs::copy_file(manifest_path(d), d.segmented / "history" / ("manifest." + std::to_string(on_disk) + ".json"),
                  fs::copy_options::overwrite_existing);
  }
  const std::uint64_t parent = std::max(ds.revision, on_disk);
  ds.revision = parent + 1;
  if (mark_reviewed) ds.reviewed_revision = ds.revision;

  const std::string records = records_to_jsonl(ds.records);
  detail::write_file_atomic(d.segmented / "records.jsonl", records);
  ds.checksums[rel(d, d.segmented / "records.jsonl")] = sha256_hex(records);

  const fs::path emb_dir = d.segmented / "embeddings";
  const std::string emb_prefix = rel(d, emb_dir) + "/";
  std::erase_if(ds.checksums, [&](const auto& kv) { return kv.first.rfind(emb_prefix, 0) == 0; });
  std::error_code ec;
  fs::remove_all(emb_dir, ec);

  ordered_json tables = ordered_json::array();
  auto write_table = [&](const EmbeddingTable& t, const std::string& stem) {
    fs::create_directories(emb_dir);
    const fs::path values = emb_dir / (stem + ".kspec");
    const fs::path rows = emb_dir / (stem + ".rows.jsonl");
    const auto bytes = encode_kspec(t.values);
    detail::write_file_atomic(values, std::span<const std::uint8_t>(bytes));
    std::string lines;
    for (const auto& o : t.owners) lines += owner_to_json(o).dump() + "\n";
    detail::write_file_atomic(rows, lines);
    ds.checksums[rel(d, values)] = checksum_bytes(bytes);
    ds.checksums[rel(d, rows)] = sha256_hex(lines);
    ordered_json j;
    j["individual_id"] = t.individual_id;
    j["method"] = t.method;
    j["values"] = rel(d, values);
    j["rows"] = rel(d, rows);
    j["row_count"] = t.owners.size();
    j["dim"] = t.values.cols;
    return j;
  };
  for (const auto& t : ds.embeddings) tables.push_back(write_table(t, "ind-" + detail::safe_stem(t.individual_id)));
  ordered_json global = nullptr;
  if (ds.global_embedding) global = write_table(*ds.global_embedding, "global");

  ordered_json m;
  m["format"] = "kanto-dataset";
  m["version"] = kDatasetFormatVersion;
  m["revision"] = ds.revision;
  m["parent_revision"] = parent == 0 ? ordered_json(nullptr) : ordered_json(parent);
  m["reviewed_revision"] = ds.reviewed_revision ? ordered_json(*ds.reviewed_revision) : ordered_json(nullptr);
  m["stage"] = to_string(ds.stage);
  m["parameters"] = ordered_json::parse(parameters_to_json(ds.params));
  m["record_count"] = ds.records.size();
  m["individuals"] = ds.individuals();
  ordered_json failures = ordered_json::array();
  for (const auto& f : ds.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
  m["failures"] = std::move(failures);
  m["embeddings"] = {{"song_level", ds.song_level_embedding}, {"tables", tables}, {"global", global}};
  ordered_json sums = ordered_json::object();
  for (const auto& [path, sum] : ds.checksums) sums[path] = sum;
  m["checksums"] = std::move(sums);
  detail::write_file_atomic(manifest_path(d), m.dump(2) + "\n");
  return ds;
}

Dataset load_dataset(const ProjectDirs& dirs) {
  if (!dataset_exists(dirs))
    throw Error(ErrorCode::state, "no dataset in " + dirs.root.string() + "; run `kanto ingest` first");
  ordered_json m;
  try {
    m = ordered_json::parse(detail::read_text_file(manifest_path(dirs)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, manifest_path(dirs).string() + ": " + e.what());
  }
  const int version = m.value("version", -1);
  if (version != kDatasetFormatVersion)
    throw Error(ErrorCode::unsupported_version,
                "dataset format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kDatasetFormatVersion) + ")");

  Dataset ds;
  ds.dirs = dirs;
  try {
    for (const auto& [path, sum] : m.at("checksums").items()) ds.checksums[path] = sum.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("manifest checksums: ") + e.what());
  }
  for (const auto& [path, expected] : ds.checksums) {
    const fs::path full = dirs.root / path;
    if (!fs::exists(full)) throw Error(ErrorCode::checksum, "artefact missing: " + path);
    if (sha256_file(full) != expected) throw Error(ErrorCode::checksum, "checksum mismatch: " + path);
  }

  try {
    ds.params = parameters_from_json(m.at("parameters").dump());
    ds.stage = stage_from_string(m.at("stage").get<std::string>());
    ds.revision = m.at("revision").get<std::uint64_t>();
    if (!m.at("reviewed_revision").is_null()) ds.reviewed_revision = m.at("reviewed_revision").get<std::uint64_t>();
    ds.records = records_from_jsonl(detail::read_text_file(dirs.segmented / "records.jsonl"));
    for (const auto& f : m.at("failures")) ds.failures.push_back({f.at("id"), f.at("message")});
    const auto& emb = m.at("embeddings");
    ds.song_level_embedding = emb.at("song_level").get<bool>();
    auto read_table = [&](const ordered_json& j) {
      EmbeddingTable t;
      t.individual_id = j.at("individual_id").get<std::string>();
      t.method = j.at("method").get<std::string>();
      t.values = read_kspec(dirs.root / j.at("values").get<std::string>());
      std::istringstream in(detail::read_text_file(dirs.root / j.at("rows").get<std::string>()));
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) t.owners.push_back(owner_from_json(ordered_json::parse(line)));
      if (t.owners.size() != t.values.rows) throw Error(ErrorCode::parse, "embedding rows do not match owners");
      return t;
    };
    for (const auto& t : emb.at("tables")) ds.embeddings.push_back(read_table(t));
    if (!emb.at("global").is_null()) ds.global_embedding = read_table(emb.at("global"));
    if (m.at("record_count").get<std::size_t>() != ds.records.size())
      throw Error(ErrorCode::validation, "record_count does not match records.jsonl");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("dataset manifest or records: ") + e.what());
  }

  for (const auto& r : ds.records) {
    if (!r.segmentation) continue;
    if (const auto problems = check_segmentation(*r.segmentation, ds.params); !problems.empty())
      throw Error(ErrorCode::validation, "record '" + r.meta.id + "': " + problems.front());
    if (r.unit_spectrogram_refs.size() != r.segmentation->unit_count())
      throw Error(ErrorCode::validation, "record '" + r.meta.id + "': unit reference count mismatch");
  }
  return ds;
}

FloatMatrix load_record_spectrogram(const Dataset& ds, const VocalisationRecord& rec) {
  if (rec.spectrogram_ref.empty())
    throw Error(ErrorCode::not_found, "record '" + rec.meta.id + "' has no spectrogram");
  return read_kspec(ds.dirs.root / rec.spectrogram_ref);
}

// ---------------------------------------------------------------------------
// Export

ExportSummary export_training_set(const Dataset& ds, double split_fraction, std::uint64_t seed) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw Error(ErrorCode::validation, "split fraction must lie strictly between 0 and 1");

  std::vector<std::string> unlabelled;
  std::map<std::pair<std::string, int>, std::vector<const VocalisationRecord*>> strata;
  for (const auto& r : ds.records) {
    if (r.status != RecordStatus::segmented) continue;
    if (!r.cluster_label) {
      unlabelled.push_back(r.meta.id);
      continue;
    }
    if (*r.cluster_label < 0) continue;
    strata[{r.meta.individual_id, *r.cluster_label}].push_back(&r);
  }
  if (!unlabelled.empty()) {
    std::string list;
    for (const auto& id : unlabelled) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::state, "records without a cluster label: " + list);
  }

  const fs::path train_root = ds.dirs.output / "train";
  const fs::path test_root = ds.dirs.output / "test";
  std::error_code ec;
  fs::remove_all(train_root, ec);
  fs::remove_all(test_root, ec);

  ExportSummary summary;
  std::mt19937_64 rng(seed);
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(),
              [](const auto* a, const auto* b) { return a->meta.id < b->meta.id; });
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng() % i]);
    const auto n_train = static_cast<std::size_t>(std::llround(split_fraction * static_cast<double>(members.size())));
    const std::string cls = detail::safe_stem(key.first) + "_" + std::to_string(key.second);
    auto& counts = summary.per_class[cls];
    for (std::size_t i = 0; i < members.size(); ++i) {
      const bool train = i < n_train;
      const fs::path dir = (train ? train_root : test_root) / cls;
      fs::create_directories(dir);
      const auto bytes = detail::read_binary_file(ds.dirs.root / members[i]->spectrogram_ref);
      detail::write_file_atomic(dir / (detail::safe_stem(members[i]->meta.id) + ".kspec"),
                                std::span<const std::uint8_t>(bytes));
      (train ? counts.first : counts.second)++;
      (train ? summary.train : summary.test)++;
    }
  }
  return summary;
}

}  // namespace kanto
