#include "kanto/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "io_util.hpp"
#include "json.hpp"
#include "kanto/error.hpp"

namespace kanto::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kFadeSeconds = 0.002;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Adds one unit starting at sample `start`; returns the number of samples written.
std::size_t render_unit(std::vector<double>& buf, int sr, std::size_t start, const UnitShape& u) {
  const auto n = static_cast<std::size_t>(std::llround(u.duration_s * sr));
  const double fade = std::min(kFadeSeconds * sr, n / 2.0);
  const double rate = (u.f_end_hz - u.f_start_hz) / u.duration_s;
  for (std::size_t i = 0; i < n && start + i < buf.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double phase = 2.0 * std::numbers::pi * (u.f_start_hz * t + 0.5 * rate * t * t);
    double g = 1.0;
    const double from_end = static_cast<double>(n - 1 - i);
    if (i < fade) g = 0.5 - 0.5 * std::cos(std::numbers::pi * i / fade);
    else if (from_end < fade) g = 0.5 - 0.5 * std::cos(std::numbers::pi * from_end / fade);
    buf[start + i] += u.amplitude * g * std::sin(phase);
  }
  return n;
}

double mel_jitter(double hz, double rel, std::mt19937_64& rng) {
  return mel_to_hz(hz_to_mel(hz) * (1.0 + rel * std::normal_distribution<double>(0.0, 1.0)(rng)));
}

std::vector<UnitShape> perturb(const std::vector<UnitShape>& units, double rel, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<UnitShape> out = units;
  for (auto& u : out) {
    u.duration_s *= std::max(0.5, 1.0 + rel * z(rng));
    u.f_start_hz = mel_jitter(u.f_start_hz, rel * 0.25, rng);
    u.f_end_hz = mel_jitter(u.f_end_hz, rel * 0.25, rng);
  }
  return out;
}

}  // namespace

Parameters segmentation_test_parameters() {
  Parameters p;
  p.sample_rate_hz = 22050;
  p.window_length = 256;
  p.hop_length = 256;
  p.fft_size = 512;
  p.num_mel_bands = 64;
  p.lowcut_hz = 500.0;
  p.highcut_hz = 10000.0;
  p.silence_threshold_db = -15.0;
  return p;
}

Song render_song(const std::vector<UnitShape>& units, const std::vector<double>& gaps_s, double lead_s,
                 double tail_s, double snr_db, int sr, std::mt19937_64& rng) {
  if (!units.empty() && gaps_s.size() + 1 != units.size())
    throw Error(ErrorCode::validation, "render_song needs one gap fewer than units");
  double total = lead_s + tail_s;
  for (const auto& u : units) total += u.duration_s;
  for (double g : gaps_s) total += g;

  std::vector<double> buf(static_cast<std::size_t>(std::llround(total * sr)) + 1, 0.0);
  Song song;
  std::size_t pos = static_cast<std::size_t>(std::llround(lead_s * sr));
  double power = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < units.size(); ++k) {
    const std::size_t n = render_unit(buf, sr, pos, units[k]);
    song.units.push_back({static_cast<double>(pos) / sr, static_cast<double>(pos + n) / sr, units[k]});
    power += 0.5 * units[k].amplitude * units[k].amplitude * static_cast<double>(n);
    active += n;
    pos += n;
    if (k < gaps_s.size()) pos += static_cast<std::size_t>(std::llround(gaps_s[k] * sr));
  }
  if (active > 0 && std::isfinite(snr_db)) {
    const double noise_power = power / static_cast<double>(active) / std::pow(10.0, snr_db / 10.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_power));
    for (double& x : buf) x += noise(rng);
  }
  song.audio.sample_rate_hz = sr;
  song.audio.samples.assign(buf.begin(), buf.end());
  return song;
}

Song random_song(std::mt19937_64& rng, const RandomSongOptions& o) {
  const std::size_t n = uniform_int(rng, o.min_units, o.max_units);
  std::vector<UnitShape> units(n);
  std::vector<double> gaps(n > 0 ? n - 1 : 0);
  for (auto& u : units) {
    u.duration_s = uniform(rng, o.min_duration_s, o.max_duration_s);
    u.f_start_hz = uniform(rng, o.min_freq_hz, o.max_freq_hz);
    u.f_end_hz = uniform(rng, 0.0, 1.0) < o.chirp_probability ? uniform(rng, o.min_freq_hz, o.max_freq_hz)
                                                             : u.f_start_hz;
    u.amplitude = 0.5;
  }
  for (double& g : gaps) g = uniform(rng, o.min_gap_s, o.max_gap_s);
  return render_song(units, gaps, 0.1, 0.1, o.snr_db, o.sample_rate_hz, rng);
}

std::vector<CorpusSong> make_repertoire_corpus(const RepertoireOptions& o) {
  std::mt19937_64 rng(o.seed);
  const double mel_lo = hz_to_mel(1800.0), mel_hi = hz_to_mel(7000.0);
  const double spacing = o.birds > 1 ? (mel_hi - mel_lo) / static_cast<double>(o.birds - 1) : 0.0;
  const double spread = o.birds > 1 ? 0.2 * spacing : 40.0;

  struct Type {
    std::vector<UnitShape> units;
    std::vector<double> gaps;
  };
  std::vector<std::vector<Type>> templates(o.birds);
  for (std::size_t b = 0; b < o.birds; ++b) {
    const double centre = mel_lo + spacing * static_cast<double>(b);
    const double tempo = uniform(rng, 0.06, 0.14);
    for (std::size_t t = 0; t < o.types_per_bird; ++t) {
      Type type;
      const std::size_t n = uniform_int(rng, 2, 4);
      for (std::size_t k = 0; k < n; ++k) {
        UnitShape u;
        u.duration_s = tempo * uniform(rng, 0.85, 1.15);
        u.f_start_hz = mel_to_hz(centre + uniform(rng, -spread, spread));
        u.f_end_hz = uniform(rng, 0.0, 1.0) < 0.5 ? u.f_start_hz : mel_to_hz(centre + uniform(rng, -spread, spread));
        u.amplitude = 0.5;
        type.units.push_back(u);
      }
      for (std::size_t k = 0; k + 1 < n; ++k) type.gaps.push_back(uniform(rng, 0.06, 0.12));
      templates[b].push_back(std::move(type));
    }
  }

  std::vector<CorpusSong> corpus;
  char id[64], bird[32];
  for (std::size_t yi = 0; yi < o.years.size(); ++yi) {
    const int year = o.years[yi];
    for (std::size_t b = 0; b < o.birds; ++b) {
      std::snprintf(bird, sizeof bird, "B%02zu", b + 1);
      for (std::size_t t = 0; t < o.types_per_bird; ++t) {
        const auto year_units = perturb(templates[b][t].units, o.year_jitter, rng);
        for (std::size_t s = 0; s < o.songs_per_type; ++s) {
          const auto units = perturb(year_units, o.song_jitter, rng);
          std::vector<double> gaps = templates[b][t].gaps;
          for (double& g : gaps) g *= 1.0 + o.song_jitter * std::normal_distribution<double>(0.0, 1.0)(rng);
          CorpusSong c;
          std::snprintf(id, sizeof id, "%s_%d_T%zu_%02zu", bird, year, t + 1, s + 1);
          c.id = id;
          c.individual_id = bird;
          c.year = year;
          c.song_type = static_cast<int>(b * o.types_per_bird + t);
          c.song = render_song(units, gaps, 0.1, 0.1, o.snr_db, o.sample_rate_hz, rng);
          corpus.push_back(std::move(c));
        }
      }
    }
  }
  return corpus;
}

void write_corpus(const std::vector<CorpusSong>& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& c : corpus) {
    write_wav(dir / (c.id + ".wav"), c.song.audio, WavEncoding::float32);
    nlohmann::ordered_json j;
    j["ID"] = c.id;
    j["individual"] = c.individual_id;
    j["datetime"] = std::to_string(c.year) + "-04-15T06:00:00";
    j["year"] = c.year;
    j["sample_rate"] = c.song.audio.sample_rate_hz;
    j["length_s"] = c.song.audio.duration_s();
    j["song_type"] = c.song_type;
    detail::write_file_atomic(dir / (c.id + ".json"), j.dump(2) + "\n");
  }
}

TemplateRepertoire make_template_repertoire(std::uint64_t seed, const TemplateOptions& o) {
  std::mt19937_64 rng(seed);
  TemplateRepertoire rep;
  rep.types = uniform_int(rng, o.min_types, o.max_types);
  const std::size_t lo = std::max(o.min_songs, 6 * rep.types);
  const std::size_t songs = uniform_int(rng, lo, std::max(lo, o.max_songs));
  const double floor_db = -65.0;
  const std::size_t pixels = o.bands * o.frames;

  auto make_template = [&] {
    std::vector<double> t(pixels, floor_db);
    const std::size_t blobs = uniform_int(rng, 2, 4);
    for (std::size_t k = 0; k < blobs; ++k) {
      const double cb = uniform(rng, 0.0, o.bands - 1.0), cf = uniform(rng, 0.0, o.frames - 1.0);
      const double sb = uniform(rng, 1.5, 4.0), sf = uniform(rng, 1.5, 5.0);
      for (std::size_t b = 0; b < o.bands; ++b) {
        for (std::size_t f = 0; f < o.frames; ++f) {
          const double d = std::pow((b - cb) / sb, 2) + std::pow((f - cf) / sf, 2);
          t[b * o.frames + f] = std::max(t[b * o.frames + f], floor_db * (1.0 - std::exp(-0.5 * d)));
        }
      }
    }
    return t;
  };
  auto rms = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(pixels));
  };

  std::vector<std::vector<double>> templates;
  for (int attempt = 0; templates.size() < rep.types; ++attempt) {
    if (attempt > 10000) throw Error(ErrorCode::internal, "cannot place distinct spectral templates");
    auto t = make_template();
    bool distinct = true;
    for (const auto& other : templates) distinct = distinct && rms(t, other) >= o.min_template_distance_db;
    if (distinct) templates.push_back(std::move(t));
  }

  std::vector<int> order(songs);
  for (std::size_t i = 0; i < songs; ++i) order[i] = static_cast<int>(i % rep.types);
  std::shuffle(order.begin(), order.end(), rng);

  std::normal_distribution<double> noise(0.0, o.noise_db);
  Parameters p;
  for (int type : order) {
    std::vector<float> values(pixels);
    for (std::size_t i = 0; i < pixels; ++i)
      values[i] = static_cast<float>(std::clamp(templates[type][i] + noise(rng), floor_db, 0.0));
    FloatMatrix m{static_cast<std::uint32_t>(o.bands), static_cast<std::uint32_t>(o.frames), std::move(values)};
    rep.songs.push_back(spectrogram_from_matrix(std::move(m), p));
    rep.truth.push_back(type);
  }
  return rep;
}

}  // namespace kanto::synth
