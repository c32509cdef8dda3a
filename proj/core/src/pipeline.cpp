#include "kanto/pipeline.hpp"

#include <algorithm>

#include "kanto/error.hpp"
#include "kanto/parallel.hpp"

namespace kanto {

namespace {

// The shared space feeds song similarity across all birds, which needs more
// room than a single repertoire.
constexpr std::size_t kSharedEmbeddingDim = 32;

std::optional<EmbeddingTable> embed_group(const FeatureGroup& g, std::size_t target_dim, const EmbedOptions& o) {
  const std::size_t rows = g.rows.rows;
  if (rows < 2) return std::nullopt;
  const std::size_t dim = std::min({target_dim, rows, static_cast<std::size_t>(g.rows.cols)});
  EmbeddingTable t;
  t.individual_id = g.individual_id;
  t.owners = g.owners;
  Embedding e;
  if (o.method == EmbeddingMethod::neighbor && rows >= 3) {
    NeighborEmbeddingOptions no;
    no.n_neighbors = std::min(o.n_neighbors, rows - 1);
    no.seed = o.seed;
    e = embed_neighbor(g.rows, dim, no);
  } else {
    e = embed_pca(g.rows, dim).embedding;
  }
  t.method = to_string(e.method);
  t.values.rows = static_cast<std::uint32_t>(e.rows);
  t.values.cols = static_cast<std::uint32_t>(e.dim);
  t.values.values.assign(e.values.begin(), e.values.end());
  return t;
}

}  // namespace

EmbedOutcome embed_dataset(const Dataset& ds, const Parameters& p, const EmbedOptions& o) {
  require_stage(ds, Stage::segmented);
  const auto groups = get_units(ds, p, o.threads);
  const auto tables = par_map(JobSpec<FeatureGroup>{groups, o.threads},
                              [&](const FeatureGroup& g) { return embed_group(g, p.embed_dim, o); });

  EmbedOutcome out;
  out.dataset = ds;
  Dataset& d = out.dataset;
  d.embeddings.clear();
  d.global_embedding.reset();
  d.song_level_embedding = p.song_level;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!tables[i].ok())
      throw Error(ErrorCode::internal, "embedding " + groups[i].individual_id + " failed: " + tables[i].error);
    if (!*tables[i].value) {
      out.notes.push_back(groups[i].individual_id + ": fewer than 2 rows, not embedded");
      continue;
    }
    d.embeddings.push_back(std::move(**tables[i].value));
  }

  const FeatureGroup global = get_units_global(ds, p, o.threads);
  if (auto t = embed_group(global, std::max(p.embed_dim, kSharedEmbeddingDim), EmbedOptions{EmbeddingMethod::pca, o.n_neighbors, o.seed, o.threads}))
    d.global_embedding = std::move(*t);
  else
    out.notes.push_back("fewer than 2 rows overall; no shared embedding");

  d.params = p;
  d.stage = Stage::embedded;
  return out;
}

}  // namespace kanto
