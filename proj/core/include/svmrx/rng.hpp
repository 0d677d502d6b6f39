#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace svmrx {

// Deterministic random source used everywhere randomness is needed.
//
// All distributions are derived from raw mt19937_64 words by fixed arithmetic
// (53-bit uniforms, Box-Muller for Gaussians) instead of std::<distribution>
// adapters, whose output is implementation-defined.  Two runs with the same
// seed therefore produce bit-identical streams on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0, 1]: (2^53 - k) / 2^53 for k in [0, 2^53).  Never zero, so
  // it is safe inside log().
  double uniform01() {
    const std::uint64_t bits = gen_() >> 11;
    return 1.0 - static_cast<double>(bits) * 0x1p-53;
  }

  // Circularly-symmetric complex Gaussian CN(0, variance): one Box-Muller
  // pair per sample, amplitude from the first uniform, phase from the second.
  std::complex<double> complex_gaussian(double variance) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double amp = std::sqrt(-variance * std::log(u1));
    const double phase = 2.0 * kPi * u2;
    return {amp * std::cos(phase), amp * std::sin(phase)};
  }

  // Unbiased uniform integer in [0, n).  Lemire multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    for (;;) {
      const std::uint64_t x = gen_();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
      const std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to whiten seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace svmrx
