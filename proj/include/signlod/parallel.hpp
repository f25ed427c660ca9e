// Minimal thread-pool-free parallel loop used by assembly and corrector solves.
#ifndef SIGNLOD_PARALLEL_HPP
#define SIGNLOD_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace signlod {

inline int default_thread_count()
{
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs body(i) for i in [0, n). Work is pulled from a shared counter, so
/// callers that need determinism must write results into per-index slots and
/// merge in index order afterwards. The first exception thrown by any worker
/// is rethrown on the calling thread.
template <class Body>
void parallel_for(int n, Body&& body, int threads = 0)
{
  if (n <= 0)
    return;
  if (threads <= 0)
    threads = default_thread_count();
  threads = std::min(threads, n);

  if (threads == 1) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        body(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 0; t < threads - 1; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();

  if (error)
    std::rethrow_exception(error);
}

} // namespace signlod

#endif
