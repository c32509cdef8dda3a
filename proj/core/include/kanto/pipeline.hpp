#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kanto/dataset.hpp"
#include "kanto/embed.hpp"

namespace kanto {

struct EmbedOptions {
  EmbeddingMethod method = EmbeddingMethod::pca;
  std::size_t n_neighbors = 15;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

struct EmbedOutcome {
  Dataset dataset;
  std::vector<std::string> notes;
};

/// Embeds each individual's feature rows (for clustering) and all songs in a
/// shared space (for similarity). The dimension is capped at
/// min(embed_dim, rows, width); groups with fewer than 2 rows are skipped.
EmbedOutcome embed_dataset(const Dataset& ds, const Parameters& p, const EmbedOptions& options = {});

}  // namespace kanto
