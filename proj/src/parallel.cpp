#include "polarimeter/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace polarimeter {
namespace {

std::atomic<std::size_t> override_threads{0};
thread_local bool inside_worker = false;

std::size_t env_threads() {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const char* raw = std::getenv("POLARIMETER_THREADS");
  if (raw == nullptr || *raw == '\0') return hw;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(raw, &used);
    if (used == std::string(raw).size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  return hw;
}

}  // namespace

std::size_t max_threads() {
  const std::size_t o = override_threads.load();
  return o != 0 ? o : env_threads();
}

void set_max_threads(std::size_t threads) { override_threads.store(threads); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::min(count, max_threads());
  if (workers <= 1 || inside_worker) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_index = std::numeric_limits<std::size_t>::max();

  auto run = [&] {
    inside_worker = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        // Keep the failure of the smallest index so errors are reproducible.
        std::lock_guard lock(failure_mutex);
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
        }
      }
    }
    inside_worker = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace polarimeter
