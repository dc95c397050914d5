#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace gt {

// Named randomness streams. One root seed plus a stream tag (and an optional
// index such as a trial number or bin number) determines an independent
// generator, so any stage of a run can be replayed in isolation.
enum class Stream : uint64_t {
  DefectiveSet = 1,
  Noise = 2,
  Binning = 3,
  Codebook = 4,
  Design = 5,
  Trial = 6,
  SweepPoint = 7,
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t root, uint64_t a, uint64_t b = 0) {
  uint64_t h = splitmix64(root);
  h = splitmix64(h ^ (a * 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ (b * 0xc2b2ae3d27d4eb4fULL));
  return h;
}

// mt19937_64 with hand-rolled distributions so that output is identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t u64() { return eng_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    uint64_t rem = UINT64_MAX % n;
    uint64_t lim = UINT64_MAX - rem;
    uint64_t x;
    do {
      x = eng_();
    } while (x > lim);
    return x % n;
  }

  bool bernoulli(double p) { return unit() < p; }

  // Number of failures before the next success in Bernoulli(q) trials.
  // Used to walk sparse design rows without touching every position.
  uint64_t geometric_skip(double q) {
    if (q >= 1.0) return 0;
    double u = unit();
    return static_cast<uint64_t>(std::floor(std::log1p(-u) / std::log1p(-q)));
  }

 private:
  std::mt19937_64 eng_;
};

inline Rng make_rng(uint64_t root, Stream s, uint64_t index = 0) {
  return Rng(mix_seed(root, static_cast<uint64_t>(s), index));
}

}  // namespace gt
