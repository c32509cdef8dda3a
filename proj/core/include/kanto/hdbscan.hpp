#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kanto {

/// One edge of the condensed tree. Ids below the point count are points;
/// cluster ids start at the point count (the root).
struct CondensedEdge {
  std::size_t parent;
  std::size_t child;
  double lambda;  // 1 / distance; +inf for zero distance
  std::size_t size;
};

struct HdbscanResult {
  std::vector<int> labels;  // -1 noise, else 0..cluster_count-1
  std::vector<double> membership_strength;
  std::size_t cluster_count = 0;
  bool too_few_points = false;  // fewer points than min_cluster_size

  std::vector<CondensedEdge> condensed_tree;
  std::vector<double> stability;        // indexed by cluster id - point count
  std::vector<std::size_t> selected;    // selected cluster ids, ascending
};

/// Hierarchical density clustering of `coords` (row-major, `dim` columns).
///
/// Core distance is the distance to the min_cluster_size-th nearest point
/// counting the point itself; the minimum spanning tree of mutual-reachability
/// distances is built with ties ordered by (weight, lower index, higher index);
/// clusters are chosen by excess of mass. The root is never selected, except
/// when it never splits and all its points sit at zero mutual-reachability
/// distance, in which case everything is one cluster. Labels are numbered by
/// each cluster's lowest point index. Throws ErrorCode::parameter when
/// min_cluster_size < 2.
HdbscanResult hdbscan_cluster(std::span<const double> coords, std::size_t dim,
                              std::size_t min_cluster_size);

/// Chance-corrected agreement of two labelings (1.0 = identical partitions).
/// Every distinct label, including -1, is treated as one block.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace kanto
