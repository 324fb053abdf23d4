#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tabpfgen/error.hpp"

namespace tabpfgen {

// Seeded draw stream used by every sampling routine in the library. The
// std::* distributions are bypassed on purpose: their draw sequences are
// implementation-defined, while reproducibility here is a contract — a seed
// must pin every output bit-for-bit, and callers document the order in which
// they consume draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two raw draws.
  double normal() {
    const double u1 = (static_cast<double>(raw() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(raw() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Uniform index in [0, n); rejection keeps it unbiased.
  std::size_t index(std::size_t n) {
    require(n > 0, ErrorCode::bad_argument, "Rng::index: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t reject_below = (-bound) % bound;  // 2^64 mod n
    std::uint64_t v = raw();
    while (v < reject_below) v = raw();
    return static_cast<std::size_t>(v % bound);
  }

  // Fisher-Yates, iterating from the back.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::mt19937_64 eng_;
};

}  // namespace tabpfgen
