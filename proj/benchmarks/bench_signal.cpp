#include <benchmark/benchmark.h>

#include <random>

#include "kanto/segmentation.hpp"
#include "kanto/spectrogram.hpp"
#include "kanto/synth.hpp"

namespace {

kanto::synth::Song song_with_units(std::size_t units) {
  std::mt19937_64 rng(1);
  kanto::synth::RandomSongOptions o;
  o.min_units = o.max_units = units;
  return kanto::synth::random_song(rng, o);
}

void BM_Spectrogram(benchmark::State& state) {
  const kanto::Parameters p;
  const auto song = song_with_units(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kanto::compute_spectrogram(song.audio.samples, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(song.audio.samples.size()));
}
BENCHMARK(BM_Spectrogram)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Segmentation(benchmark::State& state) {
  const kanto::Parameters p;
  const auto song = song_with_units(static_cast<std::size_t>(state.range(0)));
  const auto spec = kanto::compute_spectrogram(song.audio.samples, p);
  for (auto _ : state) {
    const auto seg = kanto::segment_into_units(spec, p);
    benchmark::DoNotOptimize(kanto::extract_unit_spectrograms(spec, seg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Segmentation)->Arg(4)->Arg(12)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
