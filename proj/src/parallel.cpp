#include "jumpctrl/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jumpctrl {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t num_tasks, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const int nw = std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), num_tasks);
  if (num_tasks == 0) return;
  if (nw <= 1) {
    for (std::size_t i = 0; i < num_tasks; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](std::size_t worker) {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= num_tasks) return;
      try {
        fn(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(num_tasks, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) threads.emplace_back(work, static_cast<std::size_t>(w));
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace jumpctrl
