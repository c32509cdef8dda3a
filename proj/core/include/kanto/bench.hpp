#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kanto/parameters.hpp"
#include "kanto/synth.hpp"

namespace kanto {

/// Songs to segment. A small pool of rendered songs is reused so that large
/// unit counts fit in memory; `items` indexes into `pool`.
struct BenchCorpus {
  std::vector<synth::Song> pool;
  std::vector<std::size_t> items;
  std::size_t units = 0;
};

/// Exactly `target_units` ground-truth units.
BenchCorpus make_bench_corpus(std::size_t target_units, std::uint64_t seed, const Parameters& p,
                              std::size_t pool_size = 200);

struct BenchRun {
  std::size_t workers = 0;
  double seconds = 0.0;
  std::size_t units_found = 0;
  std::size_t failures = 0;
  std::string digest;  // SHA-256 over every segmentation and unit spectrogram, in order
  double units_per_second() const { return seconds > 0.0 ? static_cast<double>(units_found) / seconds : 0.0; }
};

/// Spectrogram, segmentation and unit extraction for every item.
BenchRun run_segmentation_bench(const BenchCorpus& corpus, const Parameters& p, std::size_t workers);

}  // namespace kanto
