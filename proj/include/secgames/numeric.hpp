#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace secgames {

// Error-free accumulation of doubles (Shewchuk partials, the algorithm
// behind Python's math.fsum). The running sum is kept as a list of
// non-overlapping partials, so the final result is the correctly rounded
// sum of everything added. Used where cancellation must be exact, e.g.
// bilinear expected-utility sums over skew-symmetric payoffs.
class ExactSum {
public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  double value() const {
    double total = 0.0;
    for (double p : partials_) total += p;
    return total;
  }

private:
  std::vector<double> partials_;
};

// 64-bit FNV-1a. Stable across platforms; used for cache keys and for
// deriving per-(round, node) RNG streams.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 1469598103934665603ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t seed = 1469598103934665603ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform double in [0, 1) from a raw 64-bit draw, identical on every
// platform (unlike std::uniform_real_distribution).
inline double canonical_unit(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

}  // namespace secgames
