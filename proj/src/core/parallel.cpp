#include "parallel.hpp"

namespace pol {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() {
  unsigned n = g_threads.load();
  return n != 0 ? n : std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace pol
