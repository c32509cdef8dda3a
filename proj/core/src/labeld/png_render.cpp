#include "kanto/labeld/png_render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "kanto/error.hpp"

namespace kanto::labeld {

namespace {

// Samples of matplotlib's viridis at t = 0, 1/8, ..., 1.
constexpr std::array<std::array<double, 3>, 9> kStops{{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::array<std::uint8_t, 3> colour_map(double t) {
  if (!(t > 0.0)) t = 0.0;
  t = std::min(t, 1.0);
  const double x = t * (kStops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), kStops.size() - 2);
  const double f = x - static_cast<double>(i);
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<std::uint8_t>(std::lround(kStops[i][c] + f * (kStops[i + 1][c] - kStops[i][c])));
  return rgb;
}

std::vector<std::uint8_t> render_spectrogram_png(const FloatMatrix& m, double floor_db, std::size_t time_scale) {
  if (m.rows == 0 || m.cols == 0) throw Error(ErrorCode::validation, "cannot render an empty spectrogram");
  time_scale = std::max<std::size_t>(1, time_scale);
  const std::size_t width = m.cols * time_scale, height = m.rows;

  std::vector<std::uint8_t> pixels(width * height * 3);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t band = height - 1 - y;
    for (std::size_t x = 0; x < width; ++x) {
      const double v = m.at(band, x / time_scale);
      const auto rgb = colour_map(floor_db < 0.0 ? (v - floor_db) / -floor_db : 0.0);
      std::copy(rgb.begin(), rgb.end(), pixels.begin() + static_cast<std::ptrdiff_t>((y * width + x) * 3));
    }
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::internal, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::internal, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) png_write_row(png, pixels.data() + y * width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace kanto::labeld
