#include "kanto/spectrogram.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "kanto/error.hpp"

namespace kanto {

namespace {

constexpr double kAmplitudeFloor = 1e-10;

// The FFTW planner is not thread-safe; plan execution on private buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  const fftw_complex* output() const { return out_; }
  std::size_t size() const { return n_; }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

RealFft& thread_fft(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

struct MelBand {
  std::size_t first_bin = 0;
  std::vector<double> weights;
};

std::vector<MelBand> mel_filterbank(const Parameters& p) {
  const auto edges = mel_band_edges_hz(p.num_mel_bands, p.lowcut_hz, p.highcut_hz);
  const std::size_t bins = p.fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(p.sample_rate_hz) / p.fft_size;
  std::vector<MelBand> bank(p.num_mel_bands);
  for (std::size_t b = 0; b < p.num_mel_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    MelBand& band = bank[b];
    bool started = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      if (w > 0.0) {
        if (!started) {
          band.first_bin = k;
          started = true;
        }
        band.weights.resize(k - band.first_bin + 1, 0.0);
        band.weights.back() = w;
      }
    }
  }
  return bank;
}

// dB values -> max subtracted, clipped at floor; result stored as float.
std::vector<float> normalise_db(const std::vector<double>& db, double top_db) {
  const double peak = db.empty() ? 0.0 : *std::max_element(db.begin(), db.end());
  std::vector<float> out(db.size());
  for (std::size_t i = 0; i < db.size(); ++i)
    out[i] = static_cast<float>(std::max(db[i] - peak, -top_db));
  return out;
}

double amplitude_to_db(double a) { return 20.0 * std::log10(std::max(a, kAmplitudeFloor)); }

}  // namespace

double Spectrogram::frame_time(std::size_t t) const {
  const double centre = static_cast<double>((frame_offset + t) * hop_length) + window_length / 2.0;
  return centre / sample_rate_hz;
}

std::vector<double> Spectrogram::frame_times() const {
  std::vector<double> out(frames);
  for (std::size_t t = 0; t < frames; ++t) out[t] = frame_time(t);
  return out;
}

std::vector<double> Spectrogram::band_centres_hz() const {
  const auto edges = mel_band_edges_hz(bands, mel_low_hz, mel_high_hz);
  return {edges.begin() + 1, edges.end() - 1};
}

FloatMatrix Spectrogram::to_matrix() const {
  return FloatMatrix{static_cast<std::uint32_t>(bands), static_cast<std::uint32_t>(frames), values};
}

Spectrogram spectrogram_from_matrix(FloatMatrix m, const Parameters& p, std::size_t frame_offset) {
  Spectrogram s;
  s.bands = m.rows;
  s.frames = m.cols;
  s.values = std::move(m.values);
  s.sample_rate_hz = p.sample_rate_hz;
  s.hop_length = p.hop_length;
  s.window_length = p.window_length;
  s.floor_db = -p.top_db;
  s.mel_low_hz = p.lowcut_hz;
  s.mel_high_hz = p.highcut_hz;
  s.frame_offset = frame_offset;
  return s;
}

std::size_t frame_count(std::size_t num_samples, std::size_t window_length, std::size_t hop_length) {
  if (num_samples < window_length || hop_length == 0) return 0;
  return 1 + (num_samples - window_length) / hop_length;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_band_edges_hz(std::size_t num_bands, double low_hz, double high_hz) {
  const double lo = hz_to_mel(low_hz);
  const double hi = hz_to_mel(high_hz);
  std::vector<double> edges(num_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / (num_bands + 1));
  return edges;
}

Spectrogram compute_spectrogram(std::span<const float> audio, const Parameters& p) {
  if (audio.size() < p.window_length || p.window_length == 0)
    throw Error(ErrorCode::input_too_short,
                "audio has " + std::to_string(audio.size()) + " samples, fewer than one window (" +
                    std::to_string(p.window_length) + ")");
  if (p.hop_length == 0 || p.window_length > p.fft_size)
    throw Error(ErrorCode::parameter, "invalid STFT geometry");

  const std::size_t frames = frame_count(audio.size(), p.window_length, p.hop_length);
  const std::size_t bands = p.num_mel_bands;
  const auto bank = mel_filterbank(p);

  std::vector<double> window(p.window_length);
  for (std::size_t n = 0; n < window.size(); ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / p.window_length);

  RealFft& fft = thread_fft(p.fft_size);
  double* in = fft.input();
  std::vector<double> magnitude(p.fft_size / 2 + 1);
  std::vector<double> db(bands * frames);

  for (std::size_t t = 0; t < frames; ++t) {
    const float* frame = audio.data() + t * p.hop_length;
    for (std::size_t n = 0; n < p.window_length; ++n) in[n] = window[n] * frame[n];
    std::fill(in + p.window_length, in + p.fft_size, 0.0);
    fft.execute();
    const fftw_complex* out = fft.output();
    for (std::size_t k = 0; k < magnitude.size(); ++k) magnitude[k] = std::sqrt(out[k][0] * out[k][0] + out[k][1] * out[k][1]);
    for (std::size_t b = 0; b < bands; ++b) {
      const MelBand& band = bank[b];
      double acc = 0.0;
      for (std::size_t i = 0; i < band.weights.size(); ++i)
        acc += band.weights[i] * magnitude[band.first_bin + i];
      db[b * frames + t] = amplitude_to_db(acc);
    }
  }

  Spectrogram s;
  s.bands = bands;
  s.frames = frames;
  s.values = normalise_db(db, p.top_db);
  s.sample_rate_hz = p.sample_rate_hz;
  s.hop_length = p.hop_length;
  s.window_length = p.window_length;
  s.floor_db = -p.top_db;
  s.mel_low_hz = p.lowcut_hz;
  s.mel_high_hz = p.highcut_hz;
  return s;
}

Spectrogram bandpass(const Spectrogram& spec, double lowcut_hz, double highcut_hz) {
  if (lowcut_hz > highcut_hz) throw Error(ErrorCode::validation, "band is inverted");
  if (lowcut_hz < 0.0 || highcut_hz > spec.sample_rate_hz / 2.0)
    throw Error(ErrorCode::validation, "band must lie within [0, sample_rate/2]");
  Spectrogram out = spec;
  const auto centres = spec.band_centres_hz();
  const float floor = static_cast<float>(spec.floor_db);
  for (std::size_t b = 0; b < spec.bands; ++b) {
    if (centres[b] >= lowcut_hz && centres[b] <= highcut_hz) continue;
    std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(b * spec.frames), spec.frames, floor);
  }
  return out;
}

Spectrogram dereverberate(const Spectrogram& spec, double strength, std::size_t history_frames) {
  if (strength == 0.0 || history_frames == 0 || spec.frames == 0) return spec;
  const std::size_t n = history_frames;
  const std::size_t frames = spec.frames;
  std::vector<double> db(spec.values.size());
  std::vector<double> mag(frames);
  for (std::size_t b = 0; b < spec.bands; ++b) {
    for (std::size_t t = 0; t < frames; ++t) mag[t] = std::pow(10.0, spec.at(b, t) / 20.0);
    for (std::size_t t = 0; t < frames; ++t) {
      double value = mag[t];
      if (t >= n) {
        double window_sum = 0.0;
        for (std::size_t k = t - n; k < t; ++k) window_sum += mag[k];
        value = std::max(mag[t] - strength * (window_sum / static_cast<double>(n)), 0.0);
      }
      db[b * frames + t] = amplitude_to_db(value);
    }
  }
  Spectrogram out = spec;
  out.values = normalise_db(db, -spec.floor_db);
  return out;
}

std::vector<float> amplitude_envelope(const Spectrogram& spec) {
  std::vector<float> env(spec.frames, -std::numeric_limits<float>::infinity());
  for (std::size_t b = 0; b < spec.bands; ++b)
    for (std::size_t t = 0; t < spec.frames; ++t) env[t] = std::max(env[t], spec.at(b, t));
  return env;
}

}  // namespace kanto
