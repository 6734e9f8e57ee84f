#pragma once
// Reproducible seeding: a value-like seed source plus a deterministic PRNG.
//
// Draws are bit-stable across platforms for a given (master_seed, stream_id):
// the generator is std::mt19937_64 (standardized output sequence) and the
// uniform/Gaussian transforms below avoid implementation-defined distributions.

#include <cmath>
#include <cstdint>
#include <random>

namespace declab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based split: mixes a parent stream with a child index.
inline std::uint64_t mix_streams(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9E3779B97F4A7C15ULL * (b + 1)));
}

struct SeededSource {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  // Sub-source for an independent child stream (e.g. one Monte-Carlo trial).
  SeededSource derive(std::uint64_t child) const {
    return SeededSource{master_seed, mix_streams(stream_id, child)};
  }
};

class Prng {
 public:
  explicit Prng(SeededSource src)
      : engine_(splitmix64(splitmix64(src.master_seed) ^ mix_streams(0x5D1B023E2F7B6C3AULL, src.stream_id))) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (explicit, so output is platform-stable).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased and deterministic.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x = raw();
    while (x >= limit) x = raw();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace declab
