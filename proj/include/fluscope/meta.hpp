#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluscope/dataset.hpp"
#include "fluscope/eval.hpp"
#include "fluscope/learners.hpp"

namespace fluscope::meta {

enum class Signal { expert_keywords = 0, mined_keywords, human, anomaly, network };
inline constexpr std::size_t kSignalCount = 5;

std::string_view to_string(Signal s);
Signal parse_signal(std::string_view s);
const std::array<Signal, kSignalCount>& all_signals();

inline constexpr std::string_view kMetaSchema = "meta:expert,mined,human,anomaly,network";

/// Held-out p_sick of each base signal for one user-month.
struct BaseSignalBundle {
  std::string instance_id;
  std::array<std::optional<double>, kSignalCount> p;

  void set(Signal s, double v) { p[static_cast<std::size_t>(s)] = v; }
  std::optional<double> get(Signal s) const { return p[static_cast<std::size_t>(s)]; }
};

struct FamilyEval {
  std::string family;
  std::string classifier;
  double auc = 0.5;
};

/// Highest AUC per family; ties go to the classifier listed first in
/// `classifier_order` (then to the earlier entry). Throws ConfigError when a
/// family in `families` has no evaluation.
std::map<std::string, std::string> select_best_per_family(std::span<const FamilyEval> evals,
                                                          std::span<const std::string> families,
                                                          std::span<const std::string> classifier_order = {});

/// Five-column dataset in signal order. Throws DataError naming the instance
/// and signal when a bundle is incomplete or out of [0, 1].
Dataset build_meta_dataset(std::span<const BaseSignalBundle> bundles, std::span<const Label> labels);

/// The meta learners: adaboost, naive_bayes, decision_tree, logitboost, weighted_vote.
const std::vector<learners::Kind>& meta_kinds();

/// Leave-one-out evaluation of a meta learner. Throws ConfigError for other
/// kinds and InsufficientData for single-class data.
eval::EvalReport evaluate_meta(const learners::AlgorithmSpec& spec, const Dataset& meta_dataset,
                               double threshold = 0.5);

}  // namespace fluscope::meta
