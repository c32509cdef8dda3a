#include "kanto/cluster.hpp"

#include <algorithm>
#include <map>

#include "kanto/error.hpp"
#include "kanto/parallel.hpp"

namespace kanto {

double ClusterAssignment::noise_fraction() const {
  if (labels.empty()) return 0.0;
  const auto noise = std::count(labels.begin(), labels.end(), -1);
  return static_cast<double>(noise) / static_cast<double>(labels.size());
}

ClusterAssignment cluster_group(const EmbeddingTable& table, const Parameters& p) {
  ClusterAssignment a;
  a.individual_id = table.individual_id;
  const std::size_t rows = table.values.rows;
  a.min_cluster_size = effective_min_cluster_size(p, rows);
  if (rows == 0 || table.values.cols == 0) {
    a.labels.assign(rows, -1);
    a.membership_strength.assign(rows, 0.0);
    return a;
  }
  const std::vector<double> coords(table.values.values.begin(), table.values.values.end());
  const HdbscanResult r = hdbscan_cluster(coords, table.values.cols, a.min_cluster_size);
  a.labels = r.labels;
  a.membership_strength = r.membership_strength;
  a.cluster_count = r.cluster_count;
  return a;
}

ClusterOutcome cluster_ids(const Dataset& ds, const Parameters& p, const ClusterOptions& options) {
  require_stage(ds, Stage::embedded);
  std::vector<EmbeddingTable> tables;
  if (options.global) {
    if (!ds.global_embedding) throw Error(ErrorCode::state, "no global embedding; run `kanto embed` first");
    tables.push_back(*ds.global_embedding);
  } else {
    tables = ds.embeddings;
  }

  const auto results = par_map(JobSpec<EmbeddingTable>{tables, options.threads},
                               [&](const EmbeddingTable& t) { return cluster_group(t, p); });

  ClusterOutcome out;
  std::map<std::string, std::map<int, std::size_t>> votes;  // song -> label -> count
  std::map<std::string, bool> seen;
  for (std::size_t g = 0; g < tables.size(); ++g) {
    if (!results[g].ok()) throw Error(ErrorCode::internal, "clustering failed: " + results[g].error);
    const ClusterAssignment& a = *results[g].value;
    const std::string who = a.individual_id.empty() ? std::string("all individuals") : a.individual_id;
    if (tables[g].owners.size() < a.min_cluster_size)
      out.warnings.push_back(who + ": fewer rows than min_cluster_size; all marked noise");
    else if (a.noise_fraction() > 0.5)
      out.warnings.push_back(who + ": more than half of the rows are noise; variation may be continuous");
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      const std::string& song = tables[g].owners[i].song_id;
      seen[song] = true;
      if (a.labels[i] >= 0) votes[song][a.labels[i]]++;
    }
    out.assignments.push_back(a);
  }

  Dataset ds2 = ds;
  for (auto& r : ds2.records) {
    if (r.status != RecordStatus::segmented || r.label_source == LabelSource::human) continue;
    int label = -1;
    if (auto it = votes.find(r.meta.id); it != votes.end()) {
      std::size_t best = 0;
      for (const auto& [l, count] : it->second) {
        if (count > best) {
          best = count;
          label = l;
        }
      }
    }
    r.cluster_label = label;
    r.label_source = LabelSource::automatic;
  }
  ds2.stage = Stage::clustered;
  out.dataset = std::move(ds2);
  return out;
}

}  // namespace kanto
