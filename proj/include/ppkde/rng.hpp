#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace ppkde {

// Seedable, splittable random stream.
//
// Every stream is identified by a 64-bit key. Substream k of a stream with
// key K has key splitmix64(K + (k+1) * 0x9E3779B97F4A7C15); draws come from
// a std::mt19937_64 seeded with the key. Replicated experiments assign one
// substream per replication index, so results do not depend on how work is
// scheduled across threads.
class SplitRng {
public:
  explicit SplitRng(std::uint64_t seed) : key_(seed), engine_(seed) {}

  std::uint64_t key() const noexcept { return key_; }

  SplitRng substream(std::uint64_t index) const {
    return SplitRng(splitmix64(key_ + (index + 1) * 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1): 53 random bits offset by half an ulp.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Poisson count by Knuth's product-of-uniforms method. Means above 256 are
  // split into chunks so exp(-mean) stays far from the underflow threshold.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("SplitRng::poisson: mean must be finite and >= 0");
    std::uint64_t total = 0;
    while (mean > 256.0) {
      total += poisson_knuth(256.0);
      mean -= 256.0;
    }
    return total + poisson_knuth(mean);
  }

  static std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

} // namespace ppkde
