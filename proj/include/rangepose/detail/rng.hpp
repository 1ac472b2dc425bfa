#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rangepose::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: value i of stream `key` is the same no matter which
/// thread asks for it, so seeded output is independent of evaluation order.
struct HashRng {
  std::uint64_t key;
  std::uint64_t counter = 0;

  explicit HashRng(std::uint64_t k) : key(splitmix64(k)) {}

  std::uint64_t next() { return splitmix64(key ^ splitmix64(counter++)); }
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(next() % n); }

  double uniform01() {  // in (0, 1]
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

}  // namespace rangepose::detail
