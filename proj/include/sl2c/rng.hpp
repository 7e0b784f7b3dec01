#pragma once

// Portable fixed-seed generator for the random-matrix campaigns.  splitmix64
// is used for seeding and xoshiro256** for the stream; both are bit-exact
// across platforms, unlike the standard-library distributions.

#include <cstdint>

#include "sl2c/matgroup.hpp"

namespace sl2c {

class Rng {
 public:
  static constexpr const char* algorithm = "xoshiro256**/splitmix64";

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& si : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      si = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// uniform in [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  /// uniform in [a,b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// random SL(2) element: entries drawn uniformly in [-10,10], rescaled to
  /// unit determinant (resampling until |det| is away from zero, and
  /// positive in the real case).
  template <class F>
  Mat2<F> group_element() {
    using S = typename F::Scalar;
    for (;;) {
      Mat2<F> g;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          if constexpr (F::is_complex)
            g(i, j) = S(uniform(-10, 10), uniform(-10, 10));
          else
            g(i, j) = S(uniform(-10, 10));
        }
      const S det = g.determinant();
      if (std::abs(det) < 0.05) continue;
      if constexpr (!F::is_complex)
        if (re(det) < 0) continue;
      Mat2<F> out = g / std::sqrt(det);
      if (out.template lpNorm<Eigen::Infinity>() > 10.0) continue;  // keep entries in [-10,10]
      return out;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace sl2c
