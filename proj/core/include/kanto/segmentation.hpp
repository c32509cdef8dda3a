#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kanto/parameters.hpp"
#include "kanto/spectrogram.hpp"

namespace kanto {

enum UnitFlag : std::uint8_t {
  kUnitFlagNone = 0,
  kUnitFlagExceedsMaxDuration = 1u << 0,
};

/// Unit boundaries of one song, in seconds from the start of the recording.
struct UnitSegmentation {
  std::vector<double> onsets_s;
  std::vector<double> offsets_s;
  std::vector<double> unit_durations_s;
  std::vector<double> silence_durations_s;
  std::vector<std::uint8_t> flags;

  std::size_t unit_count() const { return onsets_s.size(); }
  bool operator==(const UnitSegmentation&) const = default;
};

/// Time of the boundary preceding frame k. A frame stands for the hop-long
/// interval around its window centre, so a run of frames [a, b) spans
/// [frame_boundary_time(a), frame_boundary_time(b)).
double frame_boundary_time(const Spectrogram& spec, std::size_t k);

/// Inverse of frame_boundary_time, relative to `spec.frame_offset`.
long long time_to_frame_boundary(const Spectrogram& spec, double t);

/// Frames whose envelope reaches `threshold_db`.
std::size_t active_frame_count(const Spectrogram& spec, double threshold_db);

/// Amplitude-threshold segmentation:
///  1. frames with envelope >= silence_threshold_db are active;
///  2. maximal active runs become candidates;
///  3. candidates separated by less than min_silence_duration_s are merged;
///  4. units shorter than min_unit_duration_s are dropped;
///  5. units longer than max_unit_duration_s are flagged, never split.
UnitSegmentation segment_into_units(const Spectrogram& spec, const Parameters& p);

/// One column slice [onset_frame, offset_frame) per unit. Throws
/// ErrorCode::range if a boundary falls outside `spec`.
std::vector<Spectrogram> extract_unit_spectrograms(const Spectrogram& spec,
                                                   const UnitSegmentation& seg);

/// Lists every broken UnitSegmentation invariant (empty when consistent).
std::vector<std::string> check_segmentation(const UnitSegmentation& seg, const Parameters& p);

}  // namespace kanto
