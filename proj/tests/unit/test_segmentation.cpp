#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kanto/error.hpp"
#include "kanto/segmentation.hpp"
#include "kanto/synth.hpp"

using namespace kanto;

namespace {

double hop_s(const Parameters& p) { return static_cast<double>(p.hop_length) / p.sample_rate_hz; }

synth::UnitShape shape(double dur, double hz) { return synth::UnitShape{dur, hz, hz, 0.5}; }

// Spectrogram built directly from an envelope: one band, given dB per frame.
Spectrogram envelope_spec(const std::vector<float>& env, const Parameters& p) {
  return spectrogram_from_matrix(FloatMatrix{1, static_cast<std::uint32_t>(env.size()), env}, p);
}

}  // namespace

TEST(Segmentation, RecoversSyntheticUnitsWithinOneHop) {
  const Parameters p = synth::segmentation_test_parameters();
  std::mt19937_64 rng(5);
  std::size_t units = 0;
  for (int s = 0; s < 40; ++s) {
    const synth::Song song = synth::random_song(rng);
    const UnitSegmentation seg = segment_into_units(compute_spectrogram(song.audio.samples, p), p);
    ASSERT_EQ(seg.unit_count(), song.units.size()) << "song " << s;
    for (std::size_t k = 0; k < seg.unit_count(); ++k) {
      EXPECT_LE(std::abs(seg.onsets_s[k] - song.units[k].onset_s), hop_s(p));
      EXPECT_LE(std::abs(seg.offsets_s[k] - song.units[k].offset_s), hop_s(p));
    }
    units += seg.unit_count();
    EXPECT_TRUE(check_segmentation(seg, p).empty());
  }
  EXPECT_GT(units, 200u);
}

TEST(Segmentation, BoundaryTimesFollowFrameGeometry) {
  Parameters p;
  p.sample_rate_hz = 1000;
  p.window_length = 8;
  p.hop_length = 4;
  p.fft_size = 8;
  p.min_unit_duration_s = 0.001;
  p.min_silence_duration_s = 0.0;
  std::vector<float> env(20, -60.0f);
  for (int t = 5; t < 9; ++t) env[t] = -3.0f;
  const UnitSegmentation seg = segment_into_units(envelope_spec(env, p), p);
  ASSERT_EQ(seg.unit_count(), 1u);
  // boundary k sits at (k * hop + (window - hop) / 2) / sr
  EXPECT_DOUBLE_EQ(seg.onsets_s[0], (5 * 4 + 2) / 1000.0);
  EXPECT_DOUBLE_EQ(seg.offsets_s[0], (9 * 4 + 2) / 1000.0);
  EXPECT_DOUBLE_EQ(seg.unit_durations_s[0], 16 / 1000.0);
}

TEST(Segmentation, ShortGapsMergeAndShortUnitsDrop) {
  Parameters p;
  p.sample_rate_hz = 1000;
  p.window_length = 10;
  p.hop_length = 10;
  p.fft_size = 16;
  p.min_unit_duration_s = 0.03;
  p.min_silence_duration_s = 0.025;
  p.max_unit_duration_s = 0.5;
  std::vector<float> env(60, -60.0f);
  for (int t : {5, 6, 7, 9, 10, 11}) env[t] = -1.0f;  // 1-frame gap: merged
  for (int t : {20, 21, 22, 23}) env[t] = -1.0f;      // 3-frame gap before: kept separate
  env[40] = -1.0f;                                    // 1 frame: too short
  const UnitSegmentation seg = segment_into_units(envelope_spec(env, p), p);
  ASSERT_EQ(seg.unit_count(), 2u);
  EXPECT_DOUBLE_EQ(seg.unit_durations_s[0], 0.07);
  EXPECT_DOUBLE_EQ(seg.unit_durations_s[1], 0.04);
  ASSERT_EQ(seg.silence_durations_s.size(), 1u);
  EXPECT_NEAR(seg.silence_durations_s[0], 0.08, 1e-12);
}

TEST(Segmentation, LongUnitsAreFlaggedNotSplit) {
  Parameters p;
  p.sample_rate_hz = 1000;
  p.window_length = 10;
  p.hop_length = 10;
  p.fft_size = 16;
  p.max_unit_duration_s = 0.1;
  std::vector<float> env(40, -60.0f);
  for (int t = 5; t < 25; ++t) env[t] = -1.0f;
  const UnitSegmentation seg = segment_into_units(envelope_spec(env, p), p);
  ASSERT_EQ(seg.unit_count(), 1u);
  EXPECT_EQ(seg.flags[0] & kUnitFlagExceedsMaxDuration, kUnitFlagExceedsMaxDuration);
  EXPECT_TRUE(check_segmentation(seg, p).empty());
}

TEST(Segmentation, SilenceGivesNoUnits) {
  const Parameters p = synth::segmentation_test_parameters();
  std::vector<float> env(50, static_cast<float>(-p.top_db));
  EXPECT_EQ(segment_into_units(envelope_spec(env, p), p).unit_count(), 0u);
}

TEST(Segmentation, ActiveFramesShrinkAsThresholdRises) {
  const Parameters p = synth::segmentation_test_parameters();
  std::mt19937_64 rng(9);
  const synth::Song song = synth::random_song(rng);
  const Spectrogram s = compute_spectrogram(song.audio.samples, p);
  std::size_t previous = active_frame_count(s, -60.0);
  for (double th = -55.0; th <= -1.0; th += 3.0) {
    const std::size_t now = active_frame_count(s, th);
    EXPECT_LE(now, previous) << th;
    previous = now;
  }
}

TEST(Segmentation, ShiftByWholeHopsShiftsBoundaries) {
  const Parameters p = synth::segmentation_test_parameters();
  std::mt19937_64 rng(21);
  std::vector<synth::UnitShape> units{shape(0.08, 2000), shape(0.12, 3500), shape(0.05, 5000)};
  const synth::Song song = synth::render_song(units, {0.1, 0.09}, 0.1, 0.1, INFINITY, p.sample_rate_hz, rng);
  const std::size_t shift = 7 * p.hop_length;
  std::vector<float> shifted(shift, 0.0f);
  shifted.insert(shifted.end(), song.audio.samples.begin(), song.audio.samples.end());
  const auto a = segment_into_units(compute_spectrogram(song.audio.samples, p), p);
  const auto b = segment_into_units(compute_spectrogram(shifted, p), p);
  ASSERT_EQ(a.unit_count(), b.unit_count());
  const double dt = static_cast<double>(shift) / p.sample_rate_hz;
  for (std::size_t k = 0; k < a.unit_count(); ++k) {
    EXPECT_NEAR(b.onsets_s[k] - a.onsets_s[k], dt, 1e-12);
    EXPECT_NEAR(b.offsets_s[k] - a.offsets_s[k], dt, 1e-12);
  }
}

TEST(Segmentation, TimeFrameRoundTrip) {
  const Parameters p = synth::segmentation_test_parameters();
  const Spectrogram s = compute_spectrogram(std::vector<float>(p.sample_rate_hz, 0.01f), p);
  for (std::size_t k : {0u, 1u, 17u, 40u}) EXPECT_EQ(time_to_frame_boundary(s, frame_boundary_time(s, k)), static_cast<long long>(k));
}

TEST(UnitSlices, MatchSegmentation) {
  const Parameters p = synth::segmentation_test_parameters();
  std::mt19937_64 rng(2);
  const synth::Song song = synth::random_song(rng);
  const Spectrogram s = compute_spectrogram(song.audio.samples, p);
  const UnitSegmentation seg = segment_into_units(s, p);
  const auto slices = extract_unit_spectrograms(s, seg);
  ASSERT_EQ(slices.size(), seg.unit_count());
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const long long a = time_to_frame_boundary(s, seg.onsets_s[k]);
    const long long b = time_to_frame_boundary(s, seg.offsets_s[k]);
    ASSERT_EQ(slices[k].frames, static_cast<std::size_t>(b - a));
    EXPECT_EQ(slices[k].frame_offset, static_cast<std::size_t>(a));
    for (std::size_t band = 0; band < s.bands; ++band)
      for (std::size_t t = 0; t < slices[k].frames; ++t)
        EXPECT_EQ(slices[k].at(band, t), s.at(band, static_cast<std::size_t>(a) + t));
  }
}

TEST(UnitSlices, OutOfRangeBoundaryIsRangeError) {
  const Parameters p = synth::segmentation_test_parameters();
  const Spectrogram s = compute_spectrogram(std::vector<float>(4096, 0.01f), p);
  UnitSegmentation seg;
  seg.onsets_s = {0.0};
  seg.offsets_s = {10.0};
  seg.unit_durations_s = {10.0};
  seg.flags = {0};
  try {
    extract_unit_spectrograms(s, seg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::range);
  }
}

TEST(CheckSegmentation, FindsBrokenInvariants) {
  const Parameters p;
  UnitSegmentation seg;
  seg.onsets_s = {0.5, 0.2};
  seg.offsets_s = {0.6, 0.3};
  seg.unit_durations_s = {0.1, 0.1};
  seg.silence_durations_s = {-0.4};
  seg.flags = {0, 0};
  EXPECT_FALSE(check_segmentation(seg, p).empty());
}
