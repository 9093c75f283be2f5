#include "panogeo/parallel.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "panogeo/error.h"

namespace panogeo {
namespace {
std::atomic<int> g_num_threads{1};
}

void set_num_threads(int n) {
  if (n < 1) throw ContractError("thread count must be >= 1");
  g_num_threads = n;
}

int num_threads() { return g_num_threads; }

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(num_threads(), count);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace panogeo
