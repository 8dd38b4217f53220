#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluscope/anomaly.hpp"
#include "fluscope/corpus.hpp"
#include "fluscope/eval.hpp"
#include "fluscope/features.hpp"
#include "fluscope/learners.hpp"
#include "fluscope/meta.hpp"
#include "fluscope/stats.hpp"
#include "fluscope/textprep.hpp"

namespace fluscope::pipeline {

/// Where mined keywords are ranked: inside each training fold, or once on all
/// instances (optimistic, for comparison only).
enum class IgScope { per_fold, full };
std::string_view to_string(IgScope s);
IgScope parse_ig_scope(std::string_view s);

/// One seed user-month with its own text and the two network streams, as bags
/// over one shared lexicon.
struct Prepared {
  std::vector<corpus::UserMonth> months;
  std::vector<std::string> ids;
  std::vector<Label> labels;
  features::BagCorpus own;
  features::BagCorpus followers;
  features::BagCorpus friends;

  const features::BagCorpus& stream(corpus::Direction d) const {
    return d == corpus::Direction::followers ? followers : friends;
  }
};

/// Tokenizes every tweet once (in parallel) and builds the three bag views.
Prepared prepare(const corpus::Cohort& cohort, const textprep::StopList& stoplist,
                 corpus::ZeroTweetSickPolicy policy = corpus::ZeroTweetSickPolicy::keep_sick);

struct SignalConfig {
  std::uint64_t seed = 7;
  std::size_t folds = 10;
  std::vector<std::size_t> mined_k = {10, 100};
  std::vector<std::size_t> network_k = {10, 100};
  /// Base classifiers tried for every keyword family, in tie-break order.
  std::vector<learners::AlgorithmSpec> classifiers;
  std::size_t vocab_max = 12393;
  IgScope ig_scope = IgScope::per_fold;
  bool exclude_target = false;
  bool anomaly_hard_label = false;
  double human_epsilon = 0.01;
  double threshold = 0.5;
};

/// naive_bayes, random_forest, decision_tree, logistic_regression, linear_svm
/// with default hyperparameters and seeds derived from `seed`.
std::vector<learners::AlgorithmSpec> default_base_classifiers(std::uint64_t seed);
/// Spec of `kind` with its rng seed derived from the master seed and the kind name.
learners::AlgorithmSpec seeded_spec(learners::Kind kind, std::uint64_t seed);

/// Held-out predictions of one classifier configuration within a family.
struct Candidate {
  meta::Signal family;
  std::string classifier;
  std::string variant;  // e.g. "k100" or "followers-k10"
  eval::EvalReport report;

  std::string label() const { return variant.empty() ? classifier : classifier + "/" + variant; }
};

struct AnomalySignal {
  std::vector<double> z;           // per user-month; 0 when not eligible
  std::vector<bool> eligible;      // at least 10 tweets and a z-score could be computed
  anomaly::ThresholdFit fit;       // over eligible months
  std::vector<double> probability; // held-out p_sick per user-month
  eval::EvalReport report;         // eligible months only
  std::optional<stats::TestResult> ks;  // z of sick vs not-sick eligible months
};

/// z-scores of eligible months, LOOCV threshold and held-out probabilities.
/// Months with fewer than 10 tweets, or of users with fewer than two eligible
/// months, get z = 0 and the threshold fitted on all eligible months.
AnomalySignal compute_anomaly_signal(const Prepared& prepared, const corpus::Cohort& cohort,
                                     const SignalConfig& config);

struct BaseSignals {
  std::vector<Candidate> candidates;
  std::map<meta::Signal, std::size_t> selected;  // family -> index into candidates
  std::vector<meta::BaseSignalBundle> bundles;
  AnomalySignal anomaly;
  eval::ConfusionMatrix human_confusion;  // annotated user-months only
  std::size_t annotated = 0;

  const Candidate& best(meta::Signal s) const { return candidates.at(selected.at(s)); }
};

/// Cross-validates every candidate of the keyword, network, human and anomaly
/// families on one shared stratified fold assignment, then selects the best
/// candidate per family.
BaseSignals compute_base_signals(const Prepared& prepared, const corpus::Cohort& cohort, const SignalConfig& config);

struct MetaRow {
  std::string classifier;
  eval::EvalReport report;
};

struct MetaResult {
  std::vector<MetaRow> rows;
  Candidate baseline;  // the selected mined-keyword candidate
  std::map<meta::Signal, double> signal_auc;  // AUC of each meta input column
  double best_single_auc = 0.0;
};

MetaResult run_meta(const BaseSignals& signals, const Prepared& prepared,
                    std::span<const learners::AlgorithmSpec> meta_specs, double threshold = 0.5);

struct AnovaConfig {
  std::uint64_t seed = 7;
  std::size_t repeats = 10;
  std::size_t folds = 5;
  std::vector<std::size_t> k = {10, 100};
  /// Empty means naive_bayes, logistic_regression, decision_tree, random_forest.
  std::vector<learners::AlgorithmSpec> classifiers;
  std::size_t vocab_max = 12393;
};

struct AnovaObservation {
  corpus::Direction source;
  std::size_t k = 0;
  learners::Kind classifier;
  std::size_t repeat = 0;
  double auc = 0.0;
};

struct NetworkAnova {
  std::vector<AnovaObservation> observations;
  stats::AnovaTable table;
  double mean_auc_followers = 0.0;
  double mean_auc_friends = 0.0;
};

/// Repeated k-fold AUC over source x keyword size x classifier, then a
/// three-factor ANOVA (Source, Keyword Size, Classifier).
NetworkAnova network_anova(const Prepared& prepared, const AnovaConfig& config);

struct KeywordTest {
  std::string keyword;
  std::size_t months_present = 0;
  stats::ContingencyTable2x2 table;  // a: sick&present, b: sick&absent, c: not&present, d: not&absent
  double odds_ratio = 0.0;
  double p_value = 1.0;
};

/// Fisher's exact test of each expert keyword's presence against the label.
std::vector<KeywordTest> expert_keyword_tests(const Prepared& prepared);

/// Number of diagnosed users per calendar month.
std::map<YearMonth, std::size_t> diagnosis_histogram(const corpus::Cohort& cohort);

}  // namespace fluscope::pipeline
