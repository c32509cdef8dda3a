#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kanto/parameters.hpp"
#include "kanto/spectrogram.hpp"
#include "kanto/wav.hpp"

namespace kanto::synth {

/// A pure tone when start and end frequency agree, else a linear chirp.
struct UnitShape {
  double duration_s = 0.1;
  double f_start_hz = 3000.0;
  double f_end_hz = 3000.0;
  double amplitude = 0.5;
};

/// Ground truth of one rendered unit, in seconds from the recording start.
struct PlacedUnit {
  double onset_s = 0.0;
  double offset_s = 0.0;
  UnitShape shape;
};

struct Song {
  Audio audio;
  std::vector<PlacedUnit> units;
};

/// Frame geometry under which boundaries are resolved to within one hop
/// (window equals hop).
Parameters segmentation_test_parameters();

/// Renders `units` separated by `gaps_s` (one fewer than units) with `lead_s`
/// of silence before and `tail_s` after, each unit with 2 ms raised-cosine
/// fades, then adds white Gaussian noise so that the mean unit power is
/// `snr_db` above the noise power. No noise when snr_db is infinite.
Song render_song(const std::vector<UnitShape>& units, const std::vector<double>& gaps_s, double lead_s,
                 double tail_s, double snr_db, int sample_rate_hz, std::mt19937_64& rng);

struct RandomSongOptions {
  std::size_t min_units = 4;
  std::size_t max_units = 12;
  double min_duration_s = 0.04;
  double max_duration_s = 0.25;
  double min_gap_s = 0.06;
  double max_gap_s = 0.2;
  double min_freq_hz = 1500.0;
  double max_freq_hz = 8000.0;
  double chirp_probability = 0.5;
  double snr_db = 20.0;
  int sample_rate_hz = 22050;
};

/// Tones and chirps at random positions, one constant amplitude per song.
Song random_song(std::mt19937_64& rng, const RandomSongOptions& o = {});

/// A population in which every bird keeps a fixed set of song types across
/// years. Birds occupy distinct frequency registers and each has its own
/// tempo; types differ by unit count, rhythm and contour within those. Each year perturbs every
/// template slightly and each song perturbs it again.
struct RepertoireOptions {
  std::size_t birds = 12;
  std::vector<int> years{2020, 2021};
  std::size_t types_per_bird = 3;
  std::size_t songs_per_type = 4;  // per bird and year
  double year_jitter = 0.02;       // relative frequency / duration spread
  double song_jitter = 0.01;
  double snr_db = 40.0;
  int sample_rate_hz = 22050;
  std::uint64_t seed = 1;
};

struct CorpusSong {
  std::string id;
  std::string individual_id;
  int year = 0;
  int song_type = 0;  // unique across the population
  Song song;
};

std::vector<CorpusSong> make_repertoire_corpus(const RepertoireOptions& o);

/// Writes `<id>.wav` and the `<id>.json` sidecar for each song into `dir`.
void write_corpus(const std::vector<CorpusSong>& corpus, const std::filesystem::path& dir);

/// Gaussian-perturbed spectral templates for clustering checks: a number of
/// song types drawn from U{min_types..max_types}, a number of songs from
/// U{max(min_songs, 6 * types)..max_songs} spread evenly over types, and each
/// song = its type's template plus per-pixel Gaussian noise.
struct TemplateOptions {
  std::size_t min_types = 3;
  std::size_t max_types = 12;
  std::size_t min_songs = 30;
  std::size_t max_songs = 200;
  std::size_t bands = 32;
  std::size_t frames = 24;
  double noise_db = 3.0;
  double min_template_distance_db = 20.0;  // RMS distance between any two templates
};

struct TemplateRepertoire {
  std::size_t types = 0;
  std::vector<Spectrogram> songs;
  std::vector<int> truth;
};

TemplateRepertoire make_template_repertoire(std::uint64_t seed, const TemplateOptions& o = {});

}  // namespace kanto::synth
