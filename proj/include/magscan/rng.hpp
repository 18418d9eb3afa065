#pragma once

#include <cmath>
#include <cstdint>

namespace magscan {

// Counter-based splittable stream: output word = mix(seed, stream, counter).
// Streams with distinct ids are independent for a fixed seed, so per-individual
// draws are reproducible regardless of generation order or parallel layout.
// Variate algorithms are fixed here (not delegated to std::distributions) so
// the bit stream is identical across standard libraries.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() {
    return mix(mix(mix(seed_ + 0x9e3779b97f4a7c15ull) ^ stream_) ^ counter_++);
  }

  double next_double() {  // uniform on [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gauss() {  // Box-Muller, two words per variate
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  int next_poisson(double lambda) {  // Knuth multiplication method
    double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

  // index into a cumulative-weight table (strictly increasing, back() == total)
  template <class Vec>
  int next_index(const Vec& cumulative) {
    double u = next_double() * cumulative.back();
    int i = 0;
    while (i + 1 < static_cast<int>(cumulative.size()) && u >= cumulative[i]) ++i;
    return i;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace magscan
