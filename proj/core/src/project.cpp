#include "kanto/project.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <system_error>

#include "io_util.hpp"
#include "json_codec.hpp"
#include "kanto/error.hpp"
#include "kanto/wav.hpp"

namespace kanto {

namespace fs = std::filesystem;
using detail::ordered_json;

ProjectDirs project_dirs(const fs::path& root) {
  ProjectDirs d;
  d.root = root;
  d.raw_data = root / "data" / "raw";
  d.segmented = root / "data" / "segmented";
  d.spectrograms = root / "data" / "spectrograms";
  d.output = root / "output";
  return d;
}

ProjectDirs init_project(const fs::path& root) {
  const ProjectDirs d = project_dirs(root);
  for (const fs::path& p : {d.root, d.raw_data, d.segmented, d.spectrograms, d.output}) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) {
      const bool denied = ec == std::errc::permission_denied ||
                          ec == std::errc::operation_not_permitted ||
                          ec == std::errc::read_only_file_system;
      throw Error(denied ? ErrorCode::permission : ErrorCode::io,
                  "cannot create " + p.string() + ": " + ec.message());
    }
  }
  return d;
}

namespace {

bool has_extension(const fs::path& p, std::string_view ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

int year_from_datetime(const std::string& dt, const std::string& source) {
  if (dt.size() >= 4 && std::all_of(dt.begin(), dt.begin() + 4, [](unsigned char c) {
        return std::isdigit(c);
      }))
    return std::stoi(dt.substr(0, 4));
  throw Error(ErrorCode::validation, source + ": datetime '" + dt + "' is not ISO-8601");
}

}  // namespace

AnnotationMeta parse_sidecar(const std::string& text, const std::string& source) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, source + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::parse, source + ": top level must be a JSON object");

  auto require = [&](const char* key) -> const ordered_json& {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::validation, source + ": missing key '" + key + "'");
    return *it;
  };
  auto bad = [&](const char* key) {
    return Error(ErrorCode::validation, source + ": key '" + std::string(key) + "' has the wrong type");
  };

  AnnotationMeta m;
  const auto& id = require("ID");
  if (!id.is_string() || id.get<std::string>().empty()) throw bad("ID");
  m.id = id.get<std::string>();
  const auto& ind = require("individual");
  if (!ind.is_string()) throw bad("individual");
  m.individual_id = ind.get<std::string>();
  const auto& dt = require("datetime");
  if (!dt.is_string()) throw bad("datetime");
  m.recorded_at = dt.get<std::string>();
  const auto& sr = require("sample_rate");
  if (!sr.is_number_integer() || sr.get<long long>() <= 0) throw bad("sample_rate");
  m.sample_rate_hz = sr.get<int>();
  const auto& len = require("length_s");
  if (!len.is_number() || !(len.get<double>() > 0.0)) throw bad("length_s");
  m.length_s = len.get<double>();

  if (auto it = j.find("year"); it != j.end()) {
    if (!it->is_number_integer()) throw bad("year");
    m.year = it->get<int>();
  } else {
    m.year = year_from_datetime(m.recorded_at, source);
  }

  static const std::set<std::string> reserved = {"ID", "individual", "datetime", "sample_rate",
                                                 "length_s", "year"};
  for (const auto& [key, value] : j.items()) {
    if (reserved.count(key)) continue;
    m.extra[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return m;
}

IngestReport ingest(const ProjectDirs& dirs) {
  IngestReport report;
  if (!fs::exists(dirs.raw_data)) return report;

  std::vector<fs::path> wavs;
  for (const auto& entry : fs::recursive_directory_iterator(dirs.raw_data)) {
    if (entry.is_regular_file() && has_extension(entry.path(), ".wav")) wavs.push_back(entry.path());
  }
  std::sort(wavs.begin(), wavs.end());

  std::map<std::string, fs::path> seen;
  for (const fs::path& wav : wavs) {
    fs::path sidecar = wav;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) {
      report.warnings.push_back("no sidecar for " + fs::relative(wav, dirs.root).generic_string() +
                                "; recording skipped");
      continue;
    }
    AnnotationMeta m = parse_sidecar(detail::read_text_file(sidecar), sidecar.string());

    if (auto [it, inserted] = seen.emplace(m.id, sidecar); !inserted) {
      throw Error(ErrorCode::conflict, "duplicate ID '" + m.id + "' in " + it->second.string() +
                                           " and " + sidecar.string());
    }
    const WavInfo info = read_wav_info(wav);
    if (info.sample_rate_hz != m.sample_rate_hz) {
      throw Error(ErrorCode::validation,
                  sidecar.string() + ": sample_rate " + std::to_string(m.sample_rate_hz) +
                      " does not match WAV header (" + std::to_string(info.sample_rate_hz) + ")");
    }
    m.wav_path = fs::relative(wav, dirs.root);
    report.catalogue.push_back(std::move(m));
  }
  std::sort(report.catalogue.begin(), report.catalogue.end(),
            [](const AnnotationMeta& a, const AnnotationMeta& b) { return a.id < b.id; });
  return report;
}

std::string catalogue_to_jsonl(const std::vector<AnnotationMeta>& catalogue) {
  std::string out;
  for (const auto& m : catalogue) {
    out += detail::meta_to_json(m).dump();
    out += '\n';
  }
  return out;
}

namespace detail {

ordered_json meta_to_json(const AnnotationMeta& m) {
  ordered_json j;
  j["id"] = m.id;
  j["wav_path"] = m.wav_path.generic_string();
  j["individual_id"] = m.individual_id;
  j["year"] = m.year;
  j["recorded_at"] = m.recorded_at;
  j["sample_rate_hz"] = m.sample_rate_hz;
  j["length_s"] = m.length_s;
  ordered_json extra = ordered_json::object();
  for (const auto& [k, v] : m.extra) extra[k] = v;
  j["extra"] = std::move(extra);
  return j;
}

AnnotationMeta meta_from_json(const ordered_json& j) {
  AnnotationMeta m;
  m.id = j.at("id").get<std::string>();
  m.wav_path = j.at("wav_path").get<std::string>();
  m.individual_id = j.at("individual_id").get<std::string>();
  m.year = j.at("year").get<int>();
  m.recorded_at = j.at("recorded_at").get<std::string>();
  m.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  m.length_s = j.at("length_s").get<double>();
  for (const auto& [k, v] : j.at("extra").items()) m.extra[k] = v.get<std::string>();
  return m;
}

}  // namespace detail

}  // namespace kanto
