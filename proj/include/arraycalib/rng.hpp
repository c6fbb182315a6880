#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace arraycalib {

// splitmix64 step; used to derive independent per-trial seeds from a base
// seed so that serial and parallel sweeps draw identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t seed_for_trial(std::uint64_t base_seed,
                                    std::uint64_t trial_index) {
  return splitmix64(splitmix64(base_seed) ^ trial_index);
}

// Deterministic random source. The mt19937_64 engine output is fixed by
// the standard; the uniform/normal transforms are written out explicitly
// instead of using std distributions, whose streams vary across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    // 53 random bits into [0, 1).
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, cosine branch only: deterministic and stateless.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo bias is irrelevant at the index ranges used here (n << 2^64).
    return eng_() % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace arraycalib
