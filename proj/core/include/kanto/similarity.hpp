#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kanto/dataset.hpp"

namespace kanto {

struct SongVector {
  std::string song_id;
  std::string individual_id;
  int year = 0;
  std::optional<int> label;
  std::vector<double> vector;
};

struct SongVectorTable {
  std::vector<SongVector> songs;
  std::vector<std::string> excluded;  // songs without units
};

/// One vector per song in the shared embedding: the song row itself, or the
/// mean of its unit rows. Throws ErrorCode::state without a shared embedding.
SongVectorTable song_vectors(const Dataset& ds);

struct SimilarityMatrix {
  std::size_t size = 0;
  std::vector<double> values;   // size x size, symmetric, unit diagonal
  std::vector<SongVector> index;  // vectors omitted to keep the matrix light
  std::vector<std::string> excluded;  // zero vectors

  double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

/// Cosine similarity over all pairs. Zero vectors are excluded and listed.
/// Throws ErrorCode::insufficient_data with fewer than 2 usable vectors.
SimilarityMatrix pairwise_similarity(const std::vector<SongVector>& songs, std::size_t threads = 1);

struct ReIdTrial {
  std::string individual_id;
  int year = 0;
  std::string best_song_id;        // from `year`
  std::string matched_song_id;     // from `year + 1`
  std::string predicted_individual;
  double score = 0.0;
  bool correct = false;
  std::size_t candidate_individuals = 0;
  std::size_t candidate_types = 0;
};

struct ReIdReport {
  std::string feature_source;
  std::vector<ReIdTrial> trials;
  double accuracy = 0.0;
  double chance_individuals = 0.0;           // mean of 1 / candidate individuals
  std::optional<double> chance_song_types;   // mean of 1 / candidate song types
  std::vector<std::string> excluded;         // individuals without a following year
  std::vector<double> within_individual_within_year;
  std::vector<double> within_individual_across_year;
  std::vector<double> across_individuals;
};

/// For every individual b with songs in year Y and Y+1: the most similar
/// pair between b's year-Y songs and anyone's year-(Y+1) songs names the
/// predicted individual. Also partitions every off-diagonal pair once into
/// within-individual-within-year, within-individual-across-year and
/// across-individual similarities. Throws ErrorCode::validation if fewer than
/// two distinct years are present.
ReIdReport cross_year_reid(const SimilarityMatrix& matrix);

/// Gaussian kernel density (Silverman bandwidth) of `values` at `points`.
std::vector<double> kernel_density(const std::vector<double>& values, const std::vector<double>& points);

/// report.json, partitions.csv and density_<partition>.csv under `dir`.
void write_reid_report(const ReIdReport& report, const std::filesystem::path& dir);

std::string reid_report_to_json(const ReIdReport& report);

}  // namespace kanto
