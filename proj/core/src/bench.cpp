#include "kanto/bench.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#include "kanto/checksum.hpp"
#include "kanto/kspec.hpp"
#include "kanto/parallel.hpp"
#include "kanto/segmentation.hpp"
#include "kanto/spectrogram.hpp"

namespace kanto {

BenchCorpus make_bench_corpus(std::size_t target_units, std::uint64_t seed, const Parameters& p,
                              std::size_t pool_size) {
  std::mt19937_64 rng(seed);
  synth::RandomSongOptions o;
  o.min_gap_s = 0.08;
  o.snr_db = 30.0;
  o.sample_rate_hz = p.sample_rate_hz;

  BenchCorpus c;
  for (std::size_t i = 0; i < pool_size; ++i) c.pool.push_back(synth::random_song(rng, o));
  for (std::size_t i = 0;; i = (i + 1) % c.pool.size()) {
    const std::size_t remaining = target_units - c.units;
    if (remaining == 0) break;
    if (c.pool[i].units.size() > remaining) {
      o.min_units = o.max_units = remaining;
      c.pool.push_back(synth::random_song(rng, o));
      i = c.pool.size() - 1;
    }
    c.items.push_back(i);
    c.units += c.pool[i].units.size();
  }
  return c;
}

BenchRun run_segmentation_bench(const BenchCorpus& corpus, const Parameters& p, std::size_t workers) {
  struct Out {
    std::size_t units;
    std::string digest;
  };
  const auto start = std::chrono::steady_clock::now();
  const auto results = par_map(JobSpec<std::size_t>{corpus.items, workers}, [&](std::size_t idx) {
    const auto& audio = corpus.pool[idx].audio.samples;
    const Spectrogram spec = compute_spectrogram(audio, p);
    const UnitSegmentation seg = segment_into_units(spec, p);
    std::string bytes;
    char buf[64];
    for (std::size_t k = 0; k < seg.unit_count(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g;", seg.onsets_s[k], seg.offsets_s[k]);
      bytes += buf;
    }
    for (const auto& unit : extract_unit_spectrograms(spec, seg)) {
      const auto enc = encode_kspec(unit.to_matrix());
      bytes.append(enc.begin(), enc.end());
    }
    return Out{seg.unit_count(), sha256_hex(bytes)};
  });
  const auto stop = std::chrono::steady_clock::now();

  BenchRun run;
  run.workers = workers;
  run.seconds = std::chrono::duration<double>(stop - start).count();
  std::string all;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++run.failures;
      all += "!" + r.error;
      continue;
    }
    run.units_found += r.value->units;
    all += r.value->digest;
  }
  run.digest = sha256_hex(all);
  return run;
}

}  // namespace kanto
