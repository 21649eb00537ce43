#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace tango {

enum class Status : int {
  ok = 0,
  format_error = 1,      // bad magic / malformed header
  truncated = 2,         // payload length mismatch
  value_error = 3,       // non-finite or out-of-policy value
  io_error = 4,          // filesystem failure
  config_error = 5,      // invalid parameter combination
  range_error = 6,       // index out of range
  empty_input = 7,       // operation needs at least one element
  no_candidates = 8,     // every token masked away
  invalid_argument = 9,  // null pointer / bad enum at the API boundary
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Status code() const { return code_; }

 private:
  Status code_;
};

[[noreturn]] inline void fail(Status code, const std::string& msg) { throw Error(code, msg); }

// ---------------------------------------------------------------------------
// Threading. Worker count resolves as: explicit set_thread_count(n>0), else
// the TANGO_THREADS environment variable, else hardware concurrency. Results
// of every parallel loop must be independent of the worker count, so bodies
// only ever write disjoint output ranges; reductions stay sequential.
// ---------------------------------------------------------------------------

void set_thread_count(unsigned n);  // 0 restores automatic resolution
unsigned thread_count();

// Calls body(begin, end) over a static partition of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// ---------------------------------------------------------------------------
// Deterministic RNG. Fixed algorithms throughout (xorshift* + explicit
// Box-Muller); std::*_distribution is implementation-defined and would break
// cross-platform reproducibility of seeded fixtures.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(split_mix(seed)) {}

  std::uint64_t next_u64() {
    // xorshift* keeps the generator dependency-free and stable.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Modulo bias is irrelevant at our scales.
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(next_u64() % n); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x = x ^ (x >> 31);
    return x != 0 ? x : 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Cosine similarity over f32 vectors, accumulated in double, index order.
// Policy: any zero vector yields 0 (degenerate tokens never look similar to
// anything), and bitwise-identical nonzero vectors yield exactly 1.0 so that
// noise-free static content passes strict threshold comparisons.
// ---------------------------------------------------------------------------

inline double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0) return 1.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = static_cast<double>(a[i]) - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace tango
