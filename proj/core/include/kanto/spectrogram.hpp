#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kanto/kspec.hpp"
#include "kanto/parameters.hpp"

namespace kanto {

/// dB-normalised mel spectrogram, `bands` x `frames`, row-major.
///
/// After normalisation the maximum is 0 dB and nothing lies below
/// `floor_db` (= -top_db). Frame t of the parent recording covers samples
/// [t*hop, t*hop + window); `frame_offset` is non-zero for unit slices.
struct Spectrogram {
  std::size_t bands = 0;
  std::size_t frames = 0;
  std::vector<float> values;

  int sample_rate_hz = 0;
  std::size_t hop_length = 0;
  std::size_t window_length = 0;
  double floor_db = -65.0;
  double mel_low_hz = 0.0;
  double mel_high_hz = 0.0;
  std::size_t frame_offset = 0;

  float at(std::size_t band, std::size_t frame) const { return values[band * frames + frame]; }
  float& at(std::size_t band, std::size_t frame) { return values[band * frames + frame]; }

  /// Centre of frame t, in seconds from the start of the recording.
  double frame_time(std::size_t t) const;
  std::vector<double> frame_times() const;

  /// Centre frequency of each mel band.
  std::vector<double> band_centres_hz() const;

  FloatMatrix to_matrix() const;
};

/// Rebuilds a spectrogram from a stored payload using the geometry in `p`.
Spectrogram spectrogram_from_matrix(FloatMatrix m, const Parameters& p, std::size_t frame_offset = 0);

/// Number of STFT frames for `num_samples` (no padding of the last window).
std::size_t frame_count(std::size_t num_samples, std::size_t window_length, std::size_t hop_length);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// `num_bands` + 2 edge frequencies evenly spaced on the mel scale over
/// [low_hz, high_hz]; band b is the triangle on edges b, b+1, b+2.
std::vector<double> mel_band_edges_hz(std::size_t num_bands, double low_hz, double high_hz);

/// STFT magnitude (periodic Hann) -> mel filterbank -> 20*log10 -> subtract
/// the global maximum -> clip at -top_db. Uses `p.sample_rate_hz` for the
/// audio. Throws ErrorCode::input_too_short if fewer samples than one window.
Spectrogram compute_spectrogram(std::span<const float> audio, const Parameters& p);

/// Sets bands whose centre lies outside [lowcut_hz, highcut_hz] to the floor.
/// Throws ErrorCode::validation for an inverted band or one outside
/// [0, sample_rate/2].
Spectrogram bandpass(const Spectrogram& spec, double lowcut_hz, double highcut_hz);

/// Echo suppression on linear magnitudes m = 10^(dB/20):
///   out[f,t] = max(m[f,t] - strength * mean(m[f, t-n .. t-1]), 0)
/// with the first n frames left untouched, then back to dB and renormalised.
Spectrogram dereverberate(const Spectrogram& spec, double strength, std::size_t history_frames);

/// Per-frame maximum over bands.
std::vector<float> amplitude_envelope(const Spectrogram& spec);

}  // namespace kanto
