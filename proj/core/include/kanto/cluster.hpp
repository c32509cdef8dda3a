#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kanto/dataset.hpp"
#include "kanto/hdbscan.hpp"

namespace kanto {

/// Labels for the rows of one clustering group.
struct ClusterAssignment {
  std::string individual_id;  // empty for the global group
  std::vector<int> labels;    // -1 noise, else contiguous from 0
  std::vector<double> membership_strength;
  std::size_t min_cluster_size = 0;
  std::size_t cluster_count = 0;

  double noise_fraction() const;
};

struct ClusterOptions {
  bool global = false;  // one group over all individuals
  std::size_t threads = 1;
};

struct ClusterOutcome {
  Dataset dataset;
  std::vector<ClusterAssignment> assignments;
  std::vector<std::string> warnings;
};

/// Runs hdbscan_cluster on a group's embedding.
ClusterAssignment cluster_group(const EmbeddingTable& table, const Parameters& p);

/// Clusters each individual's embedded rows independently and writes song
/// labels with source "auto". With unit rows a song takes the most frequent
/// non-noise label of its units (ties to the lower label). Records labelled
/// by a human are left alone. Throws ErrorCode::state if embeddings are missing.
ClusterOutcome cluster_ids(const Dataset& ds, const Parameters& p, const ClusterOptions& options = {});

}  // namespace kanto
