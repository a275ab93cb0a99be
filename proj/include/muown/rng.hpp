#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace muown {

// SplitMix64 (Steele, Lea, Flood 2014). Every pseudo-random quantity in the
// project is drawn from this generator so datasets and initializations are
// reproducible across implementations:
//   state += 0x9E3779B97F4A7C15
//   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   out = z ^ (z >> 31)
// uniform() = (out >> 11) * 2^-53, normal() = Box-Muller on two uniforms
// using the cosine branch only.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Integer in [0, n); modulo bias is below 2^-40 for the sizes used here.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
  std::uint64_t state_;
};

// Derive an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 g(base ^ (stream * 0xD1B54A32D192ED03ULL));
  return g.next();
}

} // namespace muown
