#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fluscope/dataset.hpp"
#include "fluscope/learners.hpp"

namespace fluscope::eval {

/// Rows are true classes, columns predicted; sick is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }
  double accuracy() const;
  double precision() const;  // 0 when nothing is predicted sick
  double recall() const;     // 0 when nothing is sick
  double f1() const;         // 2tp / (2tp + fp + fn); 0 when tp = 0
  bool operator==(const ConfusionMatrix&) const = default;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> curve;  // (0,0) ... (1,1), one point per distinct score
  double auc = 0.5;
};

/// Throws InsufficientData unless both labels occur; DataError on NaN scores.
RocResult roc_and_auc(std::span<const double> scores, std::span<const Label> labels);
/// Trapezoidal AUC without materializing the curve.
double auc(std::span<const double> scores, std::span<const Label> labels);
/// P(score_sick > score_not) + P(tie)/2 by comparing every pair.
double pairwise_auc(std::span<const double> scores, std::span<const Label> labels);

struct Metrics {
  double f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

/// Predicts sick iff score > threshold.
Metrics f1_accuracy_confusion(std::span<const double> scores, std::span<const Label> labels, double threshold = 0.5);
ConfusionMatrix confusion_of(std::span<const Label> truth, std::span<const Label> predicted);

struct EvalReport {
  double auc = 0.5;
  double accuracy = 0.0;
  double f1 = 0.0;
  double threshold = 0.5;
  ConfusionMatrix confusion;
  RocResult roc;
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<double> scores;  // held-out p_sick per instance
};

EvalReport make_report(std::vector<std::string> ids, std::vector<Label> labels, std::vector<double> scores,
                       double threshold = 0.5);

/// Fold index per instance. Each class is shuffled with a stream derived from
/// `seed`, then dealt round-robin, the second class continuing where the first
/// stopped, so every fold's class counts are within one of the ideal share.
/// Throws ConfigError unless 2 <= k <= n.
std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

/// Scores the `test` rows with a model fitted on the `train` rows.
using FoldScorer =
    std::function<std::vector<double>(std::span<const std::size_t> train, std::span<const std::size_t> test)>;

/// Runs every fold (in parallel) and places held-out scores by instance index.
std::vector<double> cross_validate(std::span<const std::size_t> fold_of, std::size_t k, const FoldScorer& scorer);

/// Stratified k-fold held-out p_sick per instance. Throws InsufficientData
/// when only one class is present.
std::vector<double> k_fold_cv(const Dataset& data, std::size_t k, const learners::AlgorithmSpec& spec,
                              std::uint64_t seed);
/// Leave-one-out held-out p_sick per instance.
std::vector<double> loocv(const Dataset& data, const learners::AlgorithmSpec& spec);

/// One AUC per repeat; repeat r uses folds seeded by derive_seed(seed, "eval", "repeat", r).
std::vector<double> repeated_cv_auc_distribution(const Dataset& data, const learners::AlgorithmSpec& spec,
                                                 std::size_t repeats, std::size_t k, std::uint64_t seed);

std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat);

namespace serial {
std::vector<double> cross_validate(std::span<const std::size_t> fold_of, std::size_t k, const FoldScorer& scorer);
std::vector<double> k_fold_cv(const Dataset& data, std::size_t k, const learners::AlgorithmSpec& spec,
                              std::uint64_t seed);
std::vector<double> repeated_cv_auc_distribution(const Dataset& data, const learners::AlgorithmSpec& spec,
                                                 std::size_t repeats, std::size_t k, std::uint64_t seed);
}  // namespace serial

}  // namespace fluscope::eval
