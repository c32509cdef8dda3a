#include "kanto/segmentation.hpp"

#include <cmath>

#include "kanto/error.hpp"

namespace kanto {

double frame_boundary_time(const Spectrogram& spec, std::size_t k) {
  const double lead = (static_cast<double>(spec.window_length) - static_cast<double>(spec.hop_length)) / 2.0;
  return (static_cast<double>((spec.frame_offset + k) * spec.hop_length) + lead) / spec.sample_rate_hz;
}

long long time_to_frame_boundary(const Spectrogram& spec, double t) {
  const double lead = (static_cast<double>(spec.window_length) - static_cast<double>(spec.hop_length)) / 2.0;
  const double k = (t * spec.sample_rate_hz - lead) / static_cast<double>(spec.hop_length);
  return std::llround(k) - static_cast<long long>(spec.frame_offset);
}

std::size_t active_frame_count(const Spectrogram& spec, double threshold_db) {
  std::size_t n = 0;
  for (float v : amplitude_envelope(spec)) n += v >= threshold_db;
  return n;
}

UnitSegmentation segment_into_units(const Spectrogram& spec, const Parameters& p) {
  struct Run {
    double onset;
    double offset;
  };
  const auto env = amplitude_envelope(spec);
  std::vector<Run> runs;
  for (std::size_t t = 0; t < env.size();) {
    if (env[t] < p.silence_threshold_db) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < env.size() && env[end] >= p.silence_threshold_db) ++end;
    runs.push_back({frame_boundary_time(spec, t), frame_boundary_time(spec, end)});
    t = end;
  }

  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && r.onset - merged.back().offset < p.min_silence_duration_s)
      merged.back().offset = r.offset;
    else
      merged.push_back(r);
  }

  UnitSegmentation seg;
  for (const Run& r : merged) {
    const double duration = r.offset - r.onset;
    if (duration < p.min_unit_duration_s) continue;
    seg.onsets_s.push_back(r.onset);
    seg.offsets_s.push_back(r.offset);
    seg.unit_durations_s.push_back(duration);
    seg.flags.push_back(duration > p.max_unit_duration_s ? kUnitFlagExceedsMaxDuration : kUnitFlagNone);
  }
  for (std::size_t i = 1; i < seg.onsets_s.size(); ++i)
    seg.silence_durations_s.push_back(seg.onsets_s[i] - seg.offsets_s[i - 1]);
  return seg;
}

std::vector<Spectrogram> extract_unit_spectrograms(const Spectrogram& spec,
                                                   const UnitSegmentation& seg) {
  std::vector<Spectrogram> units;
  units.reserve(seg.unit_count());
  for (std::size_t i = 0; i < seg.unit_count(); ++i) {
    const long long a = time_to_frame_boundary(spec, seg.onsets_s[i]);
    const long long b = time_to_frame_boundary(spec, seg.offsets_s[i]);
    if (a < 0 || b <= a || b > static_cast<long long>(spec.frames))
      throw Error(ErrorCode::range, "unit " + std::to_string(i) + " lies outside the spectrogram");
    Spectrogram u = spec;
    u.frames = static_cast<std::size_t>(b - a);
    u.frame_offset = spec.frame_offset + static_cast<std::size_t>(a);
    u.values.resize(spec.bands * u.frames);
    for (std::size_t band = 0; band < spec.bands; ++band)
      for (std::size_t t = 0; t < u.frames; ++t) u.at(band, t) = spec.at(band, static_cast<std::size_t>(a) + t);
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<std::string> check_segmentation(const UnitSegmentation& seg, const Parameters& p) {
  std::vector<std::string> problems;
  const std::size_t n = seg.onsets_s.size();
  if (seg.offsets_s.size() != n || seg.unit_durations_s.size() != n || seg.flags.size() != n)
    problems.push_back("per-unit arrays differ in length");
  if (seg.silence_durations_s.size() != (n == 0 ? 0 : n - 1))
    problems.push_back("silence_durations length must be units - 1");
  if (!problems.empty()) return problems;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string at = " at unit " + std::to_string(i);
    if (!(seg.offsets_s[i] > seg.onsets_s[i])) problems.push_back("offset not after onset" + at);
    if (seg.unit_durations_s[i] != seg.offsets_s[i] - seg.onsets_s[i])
      problems.push_back("unit duration inconsistent" + at);
    if (seg.unit_durations_s[i] < p.min_unit_duration_s) problems.push_back("unit too short" + at);
    if (i + 1 < n) {
      if (!(seg.onsets_s[i + 1] > seg.onsets_s[i])) problems.push_back("onsets not increasing" + at);
      if (seg.onsets_s[i + 1] < seg.offsets_s[i]) problems.push_back("units overlap" + at);
      if (seg.silence_durations_s[i] != seg.onsets_s[i + 1] - seg.offsets_s[i])
        problems.push_back("silence duration inconsistent" + at);
      if (seg.silence_durations_s[i] < p.min_silence_duration_s)
        problems.push_back("silence too short" + at);
    }
  }
  return problems;
}

}  // namespace kanto
