#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace qmet {

/// Counter-based 64-bit generator (SplitMix64 update). Stateless apart from
/// the counter, so streams can be split deterministically by hashing seeds.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derives an independent child seed; used for the root -> per-rep ->
  /// per-copy split scheme.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return g();
  }

 private:
  std::uint64_t state_;
};

/// Name recorded in output metadata so runs are reproducible bit-for-bit.
inline const char* generator_name() { return "splitmix64-boxmuller"; }

inline double uniform01(SplitMix64& g) {
  // 53-bit mantissa fill, in [0, 1)
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Box-Muller transform; one value per call, cache discarded for simplicity.
inline double normal(SplitMix64& g, double mean = 0.0, double stddev = 1.0) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

/// Multinomial draw by cumulative inversion, one uniform per trial.
inline std::array<long long, 4> multinomial4(SplitMix64& g, long long n,
                                             const std::array<double, 4>& p) {
  std::array<long long, 4> counts{0, 0, 0, 0};
  const double c1 = p[0];
  const double c2 = p[0] + p[1];
  const double c3 = p[0] + p[1] + p[2];
  for (long long i = 0; i < n; ++i) {
    double u = uniform01(g);
    if (u < c1)
      ++counts[0];
    else if (u < c2)
      ++counts[1];
    else if (u < c3)
      ++counts[2];
    else
      ++counts[3];
  }
  return counts;
}

/// Poisson draw; uses std::poisson_distribution over the counter generator.
inline long long poisson(SplitMix64& g, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return dist(g);
}

}  // namespace qmet
