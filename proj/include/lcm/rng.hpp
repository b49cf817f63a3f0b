#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lcm {

// splitmix64 finalizer; decorrelates nearby seed values.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for substream `idx` of a master seed. Each sample drawn by the
// sampler owns one substream, which makes the output of sample(p, n, seed)
// prefix-stable in n and independent of evaluation order.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t idx) {
  return mix64(seed ^ mix64(idx + 1));
}

// Standard normal stream: mt19937_64 uniforms through Box-Muller.
// std::normal_distribution is implementation-defined, so the transform is
// spelled out here to keep byte-level reproducibility a property of this
// repository rather than of a particular standard library.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1): 53-bit mantissa uniforms.
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lcm
