#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fluscope/corpus.hpp"
#include "fluscope/types.hpp"

namespace fluscope::anomaly {

inline constexpr std::uint64_t kMinMonthlyTweets = 10;

struct MonthCount {
  YearMonth month;
  std::uint64_t count = 0;
  bool operator==(const MonthCount&) const = default;
};

/// Per-month tweet counts of one user, contiguous over a window.
using MonthlySeries = std::vector<MonthCount>;

/// Counts of the user's own tweets for every month of the cohort window.
MonthlySeries monthly_series(const corpus::Cohort& cohort, const std::string& user_id);

/// Drops months with fewer than `min_count` tweets.
MonthlySeries eligible_months(const MonthlySeries& series, std::uint64_t min_count = kMinMonthlyTweets);

struct AnomalyScore {
  double z = 0.0;  // +infinity when sd = 0 and x != mean
  double mean = 0.0;
  double sd = 0.0;
};

/// z = |x - mean| / sd with the sample mean and (n-1) standard deviation of
/// `eligible` counts. With exclude_target the target's own count is left out
/// of the estimate (the first occurrence of an equal value). Throws
/// InsufficientData when fewer than two counts enter the estimate.
AnomalyScore zscore(double x, std::span<const double> eligible, bool exclude_target = false);

/// Series overload: the target month must be present among the eligible
/// months (ConfigError otherwise).
AnomalyScore zscore(YearMonth target, const MonthlySeries& series, bool exclude_target = false,
                    std::uint64_t min_count = kMinMonthlyTweets);

/// Sick iff z > threshold.
Label classify(double z, double threshold);

/// Logistic of (z - threshold); 1 for an infinite z with a finite threshold.
double anomaly_probability(double z, double threshold);

struct Instance {
  double z = 0.0;
  Label label = Label::not_sick;
};

struct ThresholdFit {
  double threshold = 0.0;                 // F1-optimal over every instance
  double f1 = 0.0;                        // in-sample F1 at `threshold`
  std::vector<double> fold_thresholds;    // fit without instance i
  std::vector<Label> held_out_predictions;
  double held_out_f1 = 0.0;
};

/// Candidate thresholds: one below the smallest z, midpoints between
/// consecutive distinct values (a + 1 when the upper value is infinite) and
/// one above the largest. Returns the F1-maximizing candidate, ties toward
/// the larger threshold. Throws InsufficientData for fewer than two instances
/// or a single class.
ThresholdFit fit_threshold_loocv(std::span<const Instance> instances);

/// Sweeps the candidates of `instances` and returns (threshold, F1).
std::pair<double, double> best_threshold(std::span<const Instance> instances);

std::vector<double> candidate_thresholds(std::span<const Instance> instances);

namespace serial {
ThresholdFit fit_threshold_loocv(std::span<const Instance> instances);
}  // namespace serial

}  // namespace fluscope::anomaly
