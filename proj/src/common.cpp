#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tango {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::format_error: return "format_error";
    case Status::truncated: return "truncated";
    case Status::value_error: return "value_error";
    case Status::io_error: return "io_error";
    case Status::config_error: return "config_error";
    case Status::range_error: return "range_error";
    case Status::empty_input: return "empty_input";
    case Status::no_candidates: return "no_candidates";
    case Status::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

namespace {

std::atomic<unsigned> g_thread_override{0};

unsigned env_thread_cap() {
  static const unsigned cached = [] {
    const char* v = std::getenv("TANGO_THREADS");
    if (v == nullptr || *v == '\0') return 0u;
    long n = std::strtol(v, nullptr, 10);
    return n > 0 ? static_cast<unsigned>(n) : 1u;
  }();
  return cached;
}

}  // namespace

void set_thread_count(unsigned n) { g_thread_override.store(n); }

unsigned thread_count() {
  unsigned n = g_thread_override.load();
  if (n == 0) n = env_thread_cap();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::min(n, 256u);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1 || n < 128) {
    body(0, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace tango
