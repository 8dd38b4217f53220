#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace fluscope {

/// Derives an independent stream seed from the master seed by name.
/// Pure function of its arguments; identical on every platform.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::string_view purpose,
                          std::uint64_t index = 0);

/// Portable random source. The engine output is fixed by the standard; all
/// distributions are implemented here so sequences do not depend on the
/// standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double gamma(double shape, double scale);
  std::uint64_t poisson(double mean);
  /// Gamma-Poisson mixture with the given mean and dispersion (shape) parameter.
  std::uint64_t negative_binomial(double mean, double dispersion);

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = static_cast<decltype(i)>(below(static_cast<std::uint64_t>(i) + 1));
      using std::swap;
      swap(first[i], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fluscope
