#include "kanto/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "io_util.hpp"
#include "json.hpp"
#include "kanto/error.hpp"
#include "kanto/parallel.hpp"

namespace kanto {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

SongVectorTable song_vectors(const Dataset& ds) {
  if (!ds.global_embedding) throw Error(ErrorCode::state, "no shared embedding; run `kanto embed` first");
  const EmbeddingTable& t = *ds.global_embedding;
  const std::size_t dim = t.values.cols;

  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < t.owners.size(); ++i) {
    auto& [sum, count] = acc[t.owners[i].song_id];
    sum.resize(dim, 0.0);
    for (std::size_t c = 0; c < dim; ++c) sum[c] += t.values.at(i, c);
    ++count;
  }

  SongVectorTable out;
  for (const auto& r : ds.records) {
    auto it = acc.find(r.meta.id);
    if (it == acc.end()) {
      out.excluded.push_back(r.meta.id);
      continue;
    }
    SongVector v;
    v.song_id = r.meta.id;
    v.individual_id = r.meta.individual_id;
    v.year = r.meta.year;
    v.label = r.cluster_label;
    v.vector = it->second.first;
    for (double& x : v.vector) x /= static_cast<double>(it->second.second);
    out.songs.push_back(std::move(v));
  }
  return out;
}

SimilarityMatrix pairwise_similarity(const std::vector<SongVector>& songs, std::size_t threads) {
  SimilarityMatrix m;
  std::vector<double> norms;
  for (const auto& s : songs) {
    double n2 = 0.0;
    for (double x : s.vector) n2 += x * x;
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      m.excluded.push_back(s.song_id);
      continue;
    }
    m.index.push_back(s);
    norms.push_back(std::sqrt(n2));
  }
  if (m.index.size() < 2)
    throw Error(ErrorCode::insufficient_data, "similarity needs at least 2 non-zero song vectors");
  const std::size_t n = m.index.size();
  m.size = n;
  m.values.assign(n * n, 0.0);

  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  const auto blocks = par_map(JobSpec<std::size_t>{rows, threads}, [&](std::size_t i) {
    std::vector<double> row(n - i);
    const auto& a = m.index[i].vector;
    for (std::size_t j = i; j < n; ++j) {
      const auto& b = m.index[j].vector;
      double dot = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) dot += a[c] * b[c];
      row[j - i] = j == i ? 1.0 : std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
    }
    return row;
  });
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = *blocks[i].value;
    for (std::size_t j = i; j < n; ++j) m.values[i * n + j] = m.values[j * n + i] = row[j - i];
  }
  for (auto& s : m.index) s.vector.clear();
  return m;
}

ReIdReport cross_year_reid(const SimilarityMatrix& m) {
  const std::size_t n = m.size;
  std::set<int> years;
  for (const auto& s : m.index) years.insert(s.year);
  if (years.size() < 2) throw Error(ErrorCode::validation, "re-identification needs at least two distinct years");

  ReIdReport report;
  report.feature_source = "shared PCA embedding of song spectrograms";

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = m.index[i];
      const auto& b = m.index[j];
      const double v = m.at(i, j);
      if (a.individual_id != b.individual_id)
        report.across_individuals.push_back(v);
      else if (a.year == b.year)
        report.within_individual_within_year.push_back(v);
      else
        report.within_individual_across_year.push_back(v);
    }
  }

  std::map<std::pair<std::string, int>, std::vector<std::size_t>> by_bird_year;
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < n; ++i) {
    by_bird_year[{m.index[i].individual_id, m.index[i].year}].push_back(i);
    by_year[m.index[i].year].push_back(i);
  }

  std::set<std::string> birds_with_trial, all_birds;
  double chance_birds = 0.0, chance_types = 0.0;
  std::size_t typed_trials = 0, correct = 0;
  for (const auto& [key, own] : by_bird_year) {
    const auto& [bird, year] = key;
    all_birds.insert(bird);
    if (!by_bird_year.count({bird, year + 1})) continue;
    const auto& candidates = by_year.at(year + 1);

    ReIdTrial trial;
    trial.individual_id = bird;
    trial.year = year;
    std::size_t best_i = own.front(), best_j = candidates.front();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : own) {
      for (std::size_t j : candidates) {
        if (m.at(i, j) > best) {
          best = m.at(i, j);
          best_i = i;
          best_j = j;
        }
      }
    }
    std::set<std::string> cand_birds;
    std::set<std::pair<std::string, int>> cand_types;
    for (std::size_t j : candidates) {
      cand_birds.insert(m.index[j].individual_id);
      if (m.index[j].label && *m.index[j].label >= 0) cand_types.insert({m.index[j].individual_id, *m.index[j].label});
    }
    trial.best_song_id = m.index[best_i].song_id;
    trial.matched_song_id = m.index[best_j].song_id;
    trial.predicted_individual = m.index[best_j].individual_id;
    trial.score = best;
    trial.correct = trial.predicted_individual == bird;
    trial.candidate_individuals = cand_birds.size();
    trial.candidate_types = cand_types.size();
    correct += trial.correct;
    chance_birds += 1.0 / static_cast<double>(cand_birds.size());
    if (!cand_types.empty()) {
      chance_types += 1.0 / static_cast<double>(cand_types.size());
      ++typed_trials;
    }
    birds_with_trial.insert(bird);
    report.trials.push_back(std::move(trial));
  }
  for (const auto& b : all_birds)
    if (!birds_with_trial.count(b)) report.excluded.push_back(b);

  if (!report.trials.empty()) {
    const double t = static_cast<double>(report.trials.size());
    report.accuracy = static_cast<double>(correct) / t;
    report.chance_individuals = chance_birds / t;
    if (typed_trials) report.chance_song_types = chance_types / static_cast<double>(typed_trials);
  }
  return report;
}

std::vector<double> kernel_density(const std::vector<double>& values, const std::vector<double>& points) {
  std::vector<double> out(points.size(), 0.0);
  const std::size_t n = values.size();
  if (n == 0) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  const double h = std::max(1.06 * sd * std::pow(static_cast<double>(n), -0.2), 1e-3);
  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t k = 0; k < points.size(); ++k) {
    double s = 0.0;
    for (double v : values) {
      const double z = (points[k] - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    out[k] = s * norm;
  }
  return out;
}

std::string reid_report_to_json(const ReIdReport& r) {
  ordered_json j;
  j["feature_source"] = r.feature_source;
  j["accuracy"] = r.accuracy;
  j["chance_individuals"] = r.chance_individuals;
  j["chance_song_types"] = r.chance_song_types ? ordered_json(*r.chance_song_types) : ordered_json(nullptr);
  ordered_json trials = ordered_json::array();
  for (const auto& t : r.trials) {
    ordered_json tj;
    tj["individual_id"] = t.individual_id;
    tj["year"] = t.year;
    tj["predicted_individual"] = t.predicted_individual;
    tj["correct"] = t.correct;
    tj["score"] = t.score;
    tj["best_song_id"] = t.best_song_id;
    tj["matched_song_id"] = t.matched_song_id;
    tj["candidate_individuals"] = t.candidate_individuals;
    tj["candidate_types"] = t.candidate_types;
    trials.push_back(std::move(tj));
  }
  j["trials"] = std::move(trials);
  j["excluded"] = r.excluded;
  auto summary = [](const std::vector<double>& v) {
    ordered_json s;
    s["count"] = v.size();
    s["min"] = v.empty() ? ordered_json(nullptr) : ordered_json(*std::min_element(v.begin(), v.end()));
    s["max"] = v.empty() ? ordered_json(nullptr) : ordered_json(*std::max_element(v.begin(), v.end()));
    return s;
  };
  j["partitions"] = {{"within_individual_within_year", summary(r.within_individual_within_year)},
                     {"within_individual_across_year", summary(r.within_individual_across_year)},
                     {"across_individuals", summary(r.across_individuals)}};
  return j.dump(2);
}

void write_reid_report(const ReIdReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  detail::write_file_atomic(dir / "report.json", reid_report_to_json(r) + "\n");

  const std::vector<std::pair<std::string, const std::vector<double>*>> parts = {
      {"within_individual_within_year", &r.within_individual_within_year},
      {"within_individual_across_year", &r.within_individual_across_year},
      {"across_individuals", &r.across_individuals}};
  std::string csv = "partition,similarity\n";
  char buf[64];
  for (const auto& [name, values] : parts) {
    for (double v : *values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      csv += name + "," + buf + "\n";
    }
  }
  detail::write_file_atomic(dir / "partitions.csv", csv);

  std::vector<double> grid(201);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = -1.0 + 2.0 * static_cast<double>(k) / 200.0;
  for (const auto& [name, values] : parts) {
    const auto density = kernel_density(*values, grid);
    std::string out = "x,density\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.6f,%.9g\n", grid[k], density[k]);
      out += buf;
    }
    detail::write_file_atomic(dir / ("density_" + name + ".csv"), out);
  }
}

}  // namespace kanto
