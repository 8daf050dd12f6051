#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace hhi {

/// Evaluates f(0..n-1) on at most `workers` threads and returns results in
/// index order. If any call throws, the exception from the lowest failing
/// index is rethrown after all workers stop.
template <class F>
auto parallel_map(std::size_t n, std::size_t workers, F&& f)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> results(n);
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = f(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t fail_index = n;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; !failed.load() && (i = next.fetch_add(1)) < n;) {
          try {
            results[i] = f(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (i < fail_index) {
              fail_index = i;
              error = std::current_exception();
            }
            failed.store(true);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace hhi
