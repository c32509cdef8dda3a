#include "kanto/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kanto {

std::size_t resolve_worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KANTO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t default_chunk_size(std::size_t items, std::size_t workers) {
  const std::size_t denom = 4 * std::max<std::size_t>(1, workers);
  return std::max<std::size_t>(1, (items + denom - 1) / denom);
}

}  // namespace kanto
