#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace r0kit {

/// Evaluates fn(i) for i in [0, n) on at most hardware_concurrency workers.
/// Results come back in input order whatever the scheduling.
template <class Fn>
auto ordered_parallel_map(std::size_t n, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> out(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace r0kit
