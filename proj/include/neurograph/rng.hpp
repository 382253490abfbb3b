#ifndef NEUROGRAPH_RNG_HPP
#define NEUROGRAPH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ng {

// Deterministic RNG. The engine (mt19937_64) is fully specified by the
// standard, and all variate transforms are hand-rolled here because the
// std::*_distribution classes are implementation-defined and would break
// bit-for-bit reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be >= 1.
  std::size_t uniform_index(std::size_t n) {
    auto r = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return r >= n ? n - 1 : r;
  }

  // Standard normal via Box-Muller (cosine branch only).
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stdev) { return mean + stdev * normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; used for per-fold / per-projection sub-seeds.
  Rng derive(std::uint64_t salt) const { return Rng(mix(seed_ ^ salt)); }

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ng

#endif
