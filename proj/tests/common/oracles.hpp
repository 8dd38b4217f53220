#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fluscope/types.hpp"

namespace oracle {

inline double entropy2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

/// Counts pairs (sick, not) with the sick score larger, ties counted half.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<fluscope::Label>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!fluscope::is_sick(y[i])) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (fluscope::is_sick(y[j])) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double f1_at(const std::vector<double>& z, const std::vector<fluscope::Label>& y, double thr) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool pred = z[i] > thr;
    if (pred && fluscope::is_sick(y[i])) ++tp;
    else if (pred) ++fp;
    else if (fluscope::is_sick(y[i])) ++fn;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

using u128 = unsigned __int128;

inline u128 choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  u128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Two-sided Fisher p of [[a,b],[c,d]]: sums C(r1,x)C(r2,c1-x) over every
/// margin-preserving table no more probable than the observed one, in exact integers.
inline double fisher_enumeration(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  const std::uint64_t r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
  const u128 observed = choose(r1, a) * choose(r2, c);
  u128 num = 0;
  const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0, hi = std::min(r1, c1);
  for (std::uint64_t x = lo; x <= hi; ++x) {
    const u128 w = choose(r1, x) * choose(r2, c1 - x);
    if (w <= observed) num += w;
  }
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(choose(n, c1)));
}

/// Every midpoint candidate (a + (b - a) / 2 between distinct neighbours, one
/// below the minimum, one above the maximum), F1 by direct counting, ties
/// toward the larger threshold. Returns (threshold, F1).
inline std::pair<double, double> threshold_sweep(const std::vector<double>& z, const std::vector<fluscope::Label>& y) {
  std::vector<double> v = z;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> cands{v.front() - 1.0};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) cands.push_back(v[i] + (v[i + 1] - v[i]) / 2);
  cands.push_back(v.back() + 1.0);
  double best_t = cands.front(), best_f = -1;
  for (double t : cands) {
    const double f = f1_at(z, y, t);
    if (f >= best_f) {
      best_f = f;
      best_t = t;
    }
  }
  return {best_t, best_f};
}

}  // namespace oracle
