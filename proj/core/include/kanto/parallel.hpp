#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace kanto {

template <typename T>
struct JobSpec {
  std::span<const T> items;
  std::size_t worker_count = 1;
  std::size_t chunk_size = 0;  // 0: ceil(items / (4 * workers))
};

/// Result slot for one item; exactly one of `value` / `error` is meaningful.
template <typename R>
struct ItemResult {
  std::optional<R> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

struct ItemFailure {
  std::size_t index;
  std::string message;
};

/// Worker count from an explicit request, else $KANTO_THREADS, else the
/// hardware concurrency. Never below 1.
std::size_t resolve_worker_count(std::size_t requested = 0);

std::size_t default_chunk_size(std::size_t items, std::size_t workers);

/// Ordered parallel map. `f` must be pure; an exception thrown for one item is
/// recorded in that item's slot and the remaining items still run. Output is
/// identical for any worker count.
template <typename T, typename F>
auto par_map(const JobSpec<T>& job, F&& f)
    -> std::vector<ItemResult<std::invoke_result_t<F&, const T&>>> {
  using R = std::invoke_result_t<F&, const T&>;
  const std::size_t n = job.items.size();
  std::vector<ItemResult<R>> results(n);
  if (n == 0) return results;

  const std::size_t workers = std::max<std::size_t>(1, job.worker_count);
  const std::size_t chunk = job.chunk_size ? job.chunk_size : default_chunk_size(n, workers);
  const std::size_t chunks = (n + chunk - 1) / chunk;

  auto run_item = [&](std::size_t i) {
    try {
      results[i].value.emplace(f(job.items[i]));
    } catch (const std::exception& e) {
      results[i].error = e.what();
    } catch (...) {
      results[i].error = "unknown error";
    }
  };

  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const std::size_t end = std::min(n, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < end; ++i) run_item(i);
    }
  };

  const std::size_t threads = std::min(workers, chunks);
  if (threads <= 1) {
    drain();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(drain);
  drain();
  pool.clear();
  return results;
}

template <typename R>
std::vector<ItemFailure> collect_failures(const std::vector<ItemResult<R>>& results) {
  std::vector<ItemFailure> out;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (!results[i].ok()) out.push_back({i, results[i].error});
  return out;
}

}  // namespace kanto
