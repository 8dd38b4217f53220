#include "fluscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include <boost/math/distributions/fisher_f.hpp>

#include "fluscope/parallel.hpp"
#include "fluscope/types.hpp"

namespace fluscope::stats {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kExactLimit = 130;

// Pascal's triangle up to row kExactLimit; C(130, 65) < 2^127.
const std::vector<std::vector<u128>>& pascal() {
  static const auto table = [] {
    std::vector<std::vector<u128>> rows(kExactLimit + 1);
    for (std::size_t n = 0; n <= kExactLimit; ++n) {
      rows[n].assign(n + 1, 1);
      for (std::size_t k = 1; k < n; ++k) rows[n][k] = rows[n - 1][k - 1] + rows[n - 1][k];
    }
    return rows;
  }();
  return table;
}

struct Margins {
  std::uint64_t r1, r2, c1, n, lo, hi;
};

Margins margins_of(const ContingencyTable2x2& t) {
  if (t.total() == 0) throw ConfigError("Fisher exact test on an empty table");
  Margins m{t.a + t.b, t.c + t.d, t.a + t.c, t.total(), 0, 0};
  m.lo = m.c1 > m.r2 ? m.c1 - m.r2 : 0;
  m.hi = std::min(m.r1, m.c1);
  return m;
}

long double to_long_double(u128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return static_cast<long double>(hi) * 18446744073709551616.0L + static_cast<long double>(lo);
}

double log_hypergeometric(const Margins& m, std::uint64_t a) {
  auto lchoose = [](long double n, long double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
  };
  using ld = long double;
  return static_cast<double>(lchoose(static_cast<ld>(m.r1), static_cast<ld>(a)) +
                             lchoose(static_cast<ld>(m.r2), static_cast<ld>(m.c1 - a)) -
                             lchoose(static_cast<ld>(m.n), static_cast<ld>(m.c1)));
}

TestResult exact_from_numerators(const Margins& m, std::uint64_t observed, const std::vector<u128>& num) {
  const auto& C = pascal();
  const u128 denom = C[m.n][m.c1];
  const u128 obs = num[observed - m.lo];
  u128 tail = 0;
  for (const auto v : num)
    if (v <= obs) tail += v;
  const long double p = to_long_double(tail) / to_long_double(denom);
  return {static_cast<double>(to_long_double(obs) / to_long_double(denom)), std::min(1.0, static_cast<double>(p))};
}

TestResult log_from_probabilities(std::uint64_t observed_offset, std::vector<double> logp) {
  const double obs = logp[observed_offset];
  std::vector<double> kept;
  for (const double lp : logp)
    if (lp <= obs + 1e-7) kept.push_back(std::exp(lp));
  std::sort(kept.begin(), kept.end());
  double p = 0.0;
  for (const double v : kept) p += v;
  return {std::exp(obs), std::min(1.0, p)};
}

}  // namespace

TestResult fisher_exact(const ContingencyTable2x2& t) {
  const auto m = margins_of(t);
  const std::size_t count = m.hi - m.lo + 1;
  if (m.n <= kExactLimit) {
    const auto& C = pascal();
    std::vector<u128> num(count);
    parallel_for(count, [&](std::size_t i) {
      const auto a = m.lo + i;
      num[i] = C[m.r1][a] * C[m.r2][m.c1 - a];
    });
    return exact_from_numerators(m, t.a, num);
  }
  std::vector<double> logp(count);
  parallel_for(count, [&](std::size_t i) { logp[i] = log_hypergeometric(m, m.lo + i); });
  return log_from_probabilities(t.a - m.lo, std::move(logp));
}

namespace serial {
TestResult fisher_exact(const ContingencyTable2x2& t) {
  const auto m = margins_of(t);
  const std::size_t count = m.hi - m.lo + 1;
  if (m.n <= kExactLimit) {
    const auto& C = pascal();
    std::vector<u128> num(count);
    for (std::size_t i = 0; i < count; ++i) num[i] = C[m.r1][m.lo + i] * C[m.r2][m.c1 - m.lo - i];
    return exact_from_numerators(m, t.a, num);
  }
  std::vector<double> logp(count);
  for (std::size_t i = 0; i < count; ++i) logp[i] = log_hypergeometric(m, m.lo + i);
  return log_from_probabilities(t.a - m.lo, std::move(logp));
}
}  // namespace serial

double odds_ratio(const ContingencyTable2x2& t) {
  const long double ad = static_cast<long double>(t.a) * static_cast<long double>(t.d);
  const long double bc = static_cast<long double>(t.b) * static_cast<long double>(t.c);
  if (ad == 0.0L) return 0.0;
  if (bc == 0.0L) return std::numeric_limits<double>::infinity();
  return static_cast<double>(ad / bc);
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double pi = 3.14159265358979323846;
  if (lambda < 1.18) {
    // Jacobi-transformed series for the CDF converges fast for small lambda.
    const double w = -(pi * pi) / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double term = std::exp(w * (2 * k - 1) * (2 * k - 1));
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// sup |F_x - F_y| over sorted samples.
double ks_statistic(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size()), m = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() || j < ys.size()) {
    double v;
    if (j == ys.size() || (i < xs.size() && xs[i] <= ys[j]))
      v = xs[i];
    else
      v = ys[j];
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

constexpr double kMaxPermutationSplits = 10000.0;

double split_count(std::size_t n, std::size_t m) {
  double c = 1.0;
  for (std::size_t k = 1; k <= n; ++k) c = c * static_cast<double>(m + k) / static_cast<double>(k);
  return c;
}

// Share of the splits of the pooled sample whose statistic reaches d.
double permutation_p(const std::vector<double>& pooled, std::size_t n, double d) {
  const std::size_t total = pooled.size();
  std::vector<bool> pick(total, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  std::vector<double> a, b;
  std::size_t hits = 0, splits = 0;
  do {
    a.clear();
    b.clear();
    for (std::size_t k = 0; k < total; ++k) (pick[k] ? a : b).push_back(pooled[k]);
    if (ks_statistic(a, b) >= d - 1e-12) ++hits;
    ++splits;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(hits) / static_cast<double>(splits);
}

}  // namespace

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ConfigError("Kolmogorov-Smirnov test needs two non-empty samples");
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double d = ks_statistic(xs, ys);
  if (split_count(xs.size(), ys.size()) <= kMaxPermutationSplits) {
    std::vector<double> pooled = xs;
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::sort(pooled.begin(), pooled.end());
    return {d, permutation_p(pooled, xs.size(), d)};
  }
  const double n = static_cast<double>(xs.size()), m = static_cast<double>(ys.size());
  const double ne = n * m / (n + m);
  return {d, kolmogorov_survival(std::sqrt(ne) * d)};
}

AnovaTable anova(std::span<const double> y, std::span<const Factor> factors) {
  const std::size_t n = y.size();
  for (const auto& f : factors)
    if (f.levels.size() != n) throw ConfigError("factor '" + f.name + "' has a level count different from y");

  if (n == 0) throw InsufficientData("ANOVA on an empty sample");
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = y[i] - mean;

  std::vector<std::vector<double>> basis;  // orthonormal columns
  auto add_column = [&](std::vector<double> v) -> std::optional<double> {
    double original = 0.0;
    for (const double x : v) original += x * x;
    original = std::sqrt(original);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q[i];
      }
    }
    double norm = 0.0;
    for (const double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (original == 0.0 || norm <= 1e-9 * original) return std::nullopt;
    for (auto& x : v) x /= norm;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += v[i] * centered[i];
    basis.push_back(std::move(v));
    return proj * proj;
  };

  add_column(std::vector<double>(n, 1.0));

  AnovaTable table;
  for (const auto& f : factors) {
    std::vector<std::string> order;
    std::map<std::string, std::size_t> seen;
    for (const auto& lv : f.levels)
      if (seen.emplace(lv, order.size()).second) order.push_back(lv);
    if (order.size() < 2) throw ConfigError("factor '" + f.name + "' needs at least two levels");
    AnovaRow row{f.name, 0, 0.0, 0.0, 1.0};
    for (std::size_t level = 1; level < order.size(); ++level) {
      std::vector<double> col(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) col[i] = f.levels[i] == order[level] ? 1.0 : 0.0;
      const auto ss = add_column(std::move(col));
      if (!ss)
        throw ConfigError("rank-deficient design: factor '" + f.name + "' level '" + order[level] +
                          "' is collinear with preceding terms");
      row.sum_sq += *ss;
      ++row.df;
    }
    table.rows.push_back(row);
  }

  for (const double c : centered) table.total_sum_sq += c * c;

  std::vector<double> residual = centered;
  for (const auto& q : basis) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += q[i] * residual[i];
    for (std::size_t i = 0; i < n; ++i) residual[i] -= dot * q[i];
  }
  double ss_res = 0.0;
  for (const double r : residual) ss_res += r * r;
  const int df_res = static_cast<int>(n) - static_cast<int>(basis.size());
  if (df_res < 1) throw InsufficientData("ANOVA leaves no residual degrees of freedom");
  table.residual = {"Residuals", df_res, ss_res, 0.0, 1.0};

  // Floating-point residue of exactly-fitting models.
  const double negligible = 1e-12 * std::max(table.total_sum_sq, 1e-300);
  if (ss_res < negligible) ss_res = 0.0;
  for (auto& row : table.rows) {
    if (row.sum_sq < negligible) row.sum_sq = 0.0;
    if (row.sum_sq == 0.0) {
      row.f_value = 0.0;
      row.p_value = 1.0;
    } else if (ss_res == 0.0) {
      row.f_value = std::numeric_limits<double>::infinity();
      row.p_value = 0.0;
    } else {
      row.f_value = (row.sum_sq / row.df) / (ss_res / df_res);
      const boost::math::fisher_f dist(row.df, df_res);
      row.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, row.f_value)), 0.0, 1.0);
    }
  }
  table.residual.sum_sq = ss_res;
  return table;
}

}  // namespace fluscope::stats
