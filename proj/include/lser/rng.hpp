#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace lser {

// splitmix64 mixer; used to derive independent stream seeds from one root.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream));
}

// Deterministic random source. mt19937_64 is fully specified by the
// standard, and the distributions are written out here because the
// std::*_distribution adapters are implementation-defined; a seed must
// reproduce the exact same stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Marsaglia's polar method.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lser
