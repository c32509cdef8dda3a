#include "kanto/kspec.hpp"

#include <bit>
#include <cstring>

#include "io_util.hpp"
#include "kanto/error.hpp"

namespace kanto {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'P', 'C'};
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_kspec(const FloatMatrix& m) {
  if (m.values.size() != static_cast<std::size_t>(m.rows) * m.cols)
    throw Error(ErrorCode::internal, "matrix payload does not match its shape");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * m.values.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kKspecVersion);
  put_u32(out, m.rows);
  put_u32(out, m.cols);
  for (float v : m.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FloatMatrix decode_kspec(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::parse, source + ": not a .kspec file");
  if (bytes[4] != kKspecVersion)
    throw Error(ErrorCode::unsupported_version,
                source + ": unsupported .kspec version " + std::to_string(bytes[4]));
  FloatMatrix m;
  m.rows = get_u32(bytes.data() + 5);
  m.cols = get_u32(bytes.data() + 9);
  const std::size_t count = static_cast<std::size_t>(m.rows) * m.cols;
  if (bytes.size() != kHeaderSize + 4 * count)
    throw Error(ErrorCode::parse, source + ": payload size does not match header");
  m.values.resize(count);
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < count; ++i) m.values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return m;
}

void write_kspec(const std::filesystem::path& path, const FloatMatrix& m) {
  detail::write_file_atomic(path, std::span<const std::uint8_t>(encode_kspec(m)));
}

FloatMatrix read_kspec(const std::filesystem::path& path) {
  return decode_kspec(detail::read_binary_file(path), path.string());
}

}  // namespace kanto
