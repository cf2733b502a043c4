#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace brw {

/// Worker count to use when 0 is requested.
inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on `workers` threads and returns the
/// results in index order. Output never depends on the worker count as long
/// as fn(i) depends only on i. If any call throws, the exception from the
/// lowest failing index is rethrown after all workers finish.
template <class Fn>
auto run_replicates(std::int64_t count, unsigned workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::int64_t>> {
  using Result = std::invoke_result_t<Fn&, std::int64_t>;
  if (workers == 0) workers = default_workers();
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(count, 0));
  std::vector<std::optional<Result>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::int64_t> next{0};

  auto work = [&] {
    for (std::int64_t i = next++; i < count; i = next++) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(fn(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };

  const unsigned threads = static_cast<unsigned>(
      std::min<std::int64_t>(workers, std::max<std::int64_t>(count, 1)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace brw
