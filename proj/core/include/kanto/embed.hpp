#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanto/kspec.hpp"
#include "kanto/spectrogram.hpp"

namespace kanto {

/// Right-pads each slice with its floor value to `pad_frames` columns and
/// flattens it row-major (band-major). One output row per slice. Throws
/// ErrorCode::range if a slice is wider than `pad_frames`.
FloatMatrix pad_and_flatten(std::span<const Spectrogram> units, std::size_t pad_frames);

enum class EmbeddingMethod { pca, neighbor };

const char* to_string(EmbeddingMethod m) noexcept;
EmbeddingMethod embedding_method_from_string(const std::string& s);

/// Row i of `values` (length `dim`) is the image of input row i.
struct Embedding {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  EmbeddingMethod method = EmbeddingMethod::pca;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct PcaModel {
  std::vector<double> mean;         // length = input width
  std::vector<double> components;   // dim x width, orthonormal rows
  std::vector<double> eigenvalues;  // covariance eigenvalues, descending, length dim
  double total_variance = 0.0;      // trace of the covariance
};

struct PcaResult {
  Embedding embedding;
  PcaModel model;
};

/// Principal-component projection onto the top `dim` directions. Each
/// component's largest-magnitude loading is made positive. Throws
/// ErrorCode::insufficient_data for fewer than 2 rows and
/// ErrorCode::parameter if dim exceeds min(rows, width) or is 0.
PcaResult embed_pca(const FloatMatrix& rows, std::size_t dim);

/// mean + embedding * components, row-major rows x width.
std::vector<double> pca_reconstruct(const PcaResult& pca);

struct NeighborEmbeddingOptions {
  std::size_t n_neighbors = 15;
  std::uint64_t seed = 42;
  std::size_t epochs = 0;  // 0: 500 below 10k rows, else 200
  double min_dist = 0.1;
  double negative_sample_rate = 5.0;
  double learning_rate = 1.0;
};

/// k-NN graph -> fuzzy edge weights -> force-directed layout. Exact rows
/// share a single embedded point. Reproducible for a given seed. Throws
/// ErrorCode::parameter if n_neighbors >= rows.
Embedding embed_neighbor(const FloatMatrix& rows, std::size_t dim,
                         const NeighborEmbeddingOptions& options = {});

}  // namespace kanto
