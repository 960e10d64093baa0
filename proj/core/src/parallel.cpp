#include "lidarsurf/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace lidarsurf {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t thread_count() {
  if (const std::size_t forced = g_override.load(); forced > 0) return forced;
  if (const char* env = std::getenv("LIDARSURF_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      // fall through to the default
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_count(std::size_t count) { g_override.store(count); }

}  // namespace lidarsurf
