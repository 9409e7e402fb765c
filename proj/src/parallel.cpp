#include "diffdist/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace diffdist {

namespace {

thread_local bool t_in_worker = false;

std::atomic<int> g_max_threads{0};  // 0 = not set yet

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Lazily started pool. Workers block on a generation counter; each dispatch
// publishes a job and wakes everyone.
class Pool {
 public:
  static Pool& instance() {
    static Pool* pool = new Pool();  // leaked so worker threads never face teardown
    return *pool;
  }

  void run(std::size_t n, const RangeFn& fn, int threads) {
    ensure_workers(threads - 1);
    std::size_t chunks = static_cast<std::size_t>(threads);
    if (chunks > n) chunks = n;
    {
      std::unique_lock<std::mutex> lock(m_);
      job_fn_ = &fn;
      job_n_ = n;
      job_chunks_ = chunks;
      next_chunk_.store(0, std::memory_order_relaxed);
      pending_.store(static_cast<int>(chunks), std::memory_order_relaxed);
      ++generation_;
      cv_.notify_all();
    }
    work_until_done();
    std::unique_lock<std::mutex> lock(m_);
    done_cv_.wait(lock, [&] { return pending_.load(std::memory_order_acquire) == 0; });
    job_fn_ = nullptr;
  }

 private:
  Pool() = default;

  void ensure_workers(int wanted) {
    std::unique_lock<std::mutex> lock(m_);
    while (static_cast<int>(workers_.size()) < wanted)
      workers_.emplace_back([this] { worker_loop(); });
  }

  void worker_loop() {
    t_in_worker = true;
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
      }
      work_until_done();
    }
  }

  void work_until_done() {
    for (;;) {
      const std::size_t c = next_chunk_.fetch_add(1, std::memory_order_relaxed);
      if (c >= job_chunks_) return;
      const std::size_t begin = job_n_ * c / job_chunks_;
      const std::size_t end = job_n_ * (c + 1) / job_chunks_;
      const bool nested = t_in_worker;
      t_in_worker = true;
      (*job_fn_)(begin, end);
      t_in_worker = nested;
      if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::unique_lock<std::mutex> lock(m_);
        done_cv_.notify_all();
      }
    }
  }

  std::mutex m_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::vector<std::thread> workers_;
  std::uint64_t generation_ = 0;
  const RangeFn* job_fn_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t job_chunks_ = 0;
  std::atomic<std::size_t> next_chunk_{0};
  std::atomic<int> pending_{0};
};

}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = default_threads();
    g_max_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void parallel_for(std::size_t n, const RangeFn& fn) {
  if (n == 0) return;
  const int threads = max_threads();
  if (threads <= 1 || n == 1 || t_in_worker) {
    fn(0, n);
    return;
  }
  Pool::instance().run(n, fn, threads);
}

}  // namespace diffdist
