#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fluscope::stats {

/// Rows: sick / not-sick month. Columns: keyword present / absent.
///   | a  b |
///   | c  d |
struct ContingencyTable2x2 {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;

  std::uint64_t total() const { return a + b + c + d; }
  ContingencyTable2x2 rows_swapped() const { return {c, d, a, b}; }
  ContingencyTable2x2 cols_swapped() const { return {b, a, d, c}; }
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sided Fisher exact test: sums the probabilities of every table with the
/// observed margins that is no more probable than the observed one. Totals up
/// to 130 use exact 128-bit integer arithmetic; larger tables use log-factorials
/// with a 1e-7 relative tie tolerance. `statistic` is the observed table's
/// hypergeometric probability. Throws ConfigError on an empty table.
TestResult fisher_exact(const ContingencyTable2x2& t);

namespace serial {
TestResult fisher_exact(const ContingencyTable2x2& t);
}  // namespace serial

/// (a*d)/(b*c); +infinity when b*c = 0 < a*d; 0 when a*d = 0.
double odds_ratio(const ContingencyTable2x2& t);

/// Two-sample Kolmogorov-Smirnov. D = sup |F_x - F_y|. When the pooled sample
/// has at most 10^4 splits into groups of |x| and |y|, p is the exact share of
/// splits with a statistic >= D; otherwise p comes from the asymptotic
/// Kolmogorov distribution at sqrt(n_e) * D with n_e = nm/(n+m).
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct Factor {
  std::string name;
  std::vector<std::string> levels;  // one level label per observation
};

struct AnovaRow {
  std::string factor;
  int df = 0;
  double sum_sq = 0.0;
  double f_value = 0.0;
  double p_value = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;  // one per factor, in the given order
  AnovaRow residual;           // f_value and p_value unused
  double total_sum_sq = 0.0;   // about the grand mean
};

/// Main-effects ANOVA with sequential (type I) sums of squares, factors entered
/// in the given order with treatment coding. Throws ConfigError for a factor
/// with fewer than two levels or a design whose columns are collinear.
AnovaTable anova(std::span<const double> y, std::span<const Factor> factors);

}  // namespace fluscope::stats
