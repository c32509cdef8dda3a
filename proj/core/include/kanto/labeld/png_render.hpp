#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "kanto/kspec.hpp"

namespace kanto::labeld {

/// Viridis-like colour for t in [0, 1] (clamped).
std::array<std::uint8_t, 3> colour_map(double t);

/// RGB PNG of a bands x frames dB matrix: the lowest band on the bottom row,
/// each frame repeated `time_scale` times, `floor_db`..0 mapped onto the
/// colour map.
std::vector<std::uint8_t> render_spectrogram_png(const FloatMatrix& m, double floor_db, std::size_t time_scale = 2);

}  // namespace kanto::labeld
