#include "io_util.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "kanto/error.hpp"

namespace kanto::detail {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io, "read failed for " + path.string());
  return buffer.str();
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io, "read failed for " + path.string());
  return bytes;
}

namespace {

void write_bytes_atomic(const fs::path& path, const char* data, std::size_t size) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out.write(data, static_cast<std::streamsize>(size));
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  write_bytes_atomic(path, contents.data(), contents.size());
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> contents) {
  write_bytes_atomic(path, reinterpret_cast<const char*>(contents.data()), contents.size());
}

std::string safe_stem(std::string_view id) {
  std::string stem;
  stem.reserve(id.size());
  bool changed = id.empty() || id.front() == '.';
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    stem.push_back(ok ? c : '_');
    changed |= !ok;
  }
  if (!changed) return stem;
  // FNV-1a keeps the mapping stable across platforms.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char suffix[20];
  std::snprintf(suffix, sizeof suffix, "-%08llx", static_cast<unsigned long long>(h & 0xffffffffull));
  return "_" + stem + suffix;
}

}  // namespace kanto::detail
