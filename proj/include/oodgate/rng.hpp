#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace oodgate {

// splitmix64 finalizer; also used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9e3779b97f4a7c15ull * (b + 1));
}

// Deterministic generator (splitmix64 stream). All distributions are
// implemented here rather than with <random> so that identical seeds give
// identical sequences on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream; children with distinct tags never collide in
  // practice. The parent's own sequence is unaffected.
  Rng stream(std::uint64_t tag) const { return Rng(mix64(state_, tag)); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform on [0, n). Multiply-shift bound; bias is ~2^-32 and irrelevant
  // for the sample sizes used here.
  std::uint32_t uniform_u32(std::uint32_t n) {
    const std::uint64_t x = next_u64() >> 32;
    return static_cast<std::uint32_t>((x * n) >> 32);
  }

  // Uniform on [0, 1).
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) {
    return lo + uniform_real() * (hi - lo);
  }

  // Standard normal via the polar method.
  double normal() {
    for (;;) {
      const double u = uniform_real(-1.0, 1.0);
      const double v = uniform_real(-1.0, 1.0);
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_u32(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct values from [0, n), in draw order.
  std::vector<int> sample_distinct(int k, int n) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k && i < n; ++i) {
      const int j = i + static_cast<int>(uniform_u32(static_cast<std::uint32_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace oodgate
