#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kanto {

/// Dense row-major float32 matrix, the payload of a `.kspec` file.
struct FloatMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool operator==(const FloatMatrix&) const = default;
};

/// `.kspec` layout: "KSPC", u8 version (1), u32 rows, u32 cols, then
/// rows*cols IEEE-754 binary32 values; all little-endian, row-major.
inline constexpr std::uint8_t kKspecVersion = 1;

std::vector<std::uint8_t> encode_kspec(const FloatMatrix& m);

/// Throws ErrorCode::parse on a bad magic or size, ErrorCode::unsupported_version
/// on an unknown version byte. `source` names the input in messages.
FloatMatrix decode_kspec(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

void write_kspec(const std::filesystem::path& path, const FloatMatrix& m);
FloatMatrix read_kspec(const std::filesystem::path& path);

}  // namespace kanto
