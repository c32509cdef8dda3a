#include <benchmark/benchmark.h>

#include <random>

#include "kanto/embed.hpp"
#include "kanto/hdbscan.hpp"

namespace {

kanto::FloatMatrix random_rows(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.0f, 1.0f);
  kanto::FloatMatrix m{static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols), {}};
  m.values.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.values[r * cols + c] = g(rng) + static_cast<float>(r % 5) * 4.0f;
  return m;
}

void BM_Pca(benchmark::State& state) {
  const auto m = random_rows(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kanto::embed_pca(m, 10));
}
BENCHMARK(BM_Pca)->Args({200, 768})->Args({2000, 256})->Unit(benchmark::kMillisecond);

void BM_Hdbscan(benchmark::State& state) {
  const auto m = random_rows(static_cast<std::size_t>(state.range(0)), 10);
  const std::vector<double> coords(m.values.begin(), m.values.end());
  for (auto _ : state) benchmark::DoNotOptimize(kanto::hdbscan_cluster(coords, 10, 10));
}
BENCHMARK(BM_Hdbscan)->Arg(200)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace
