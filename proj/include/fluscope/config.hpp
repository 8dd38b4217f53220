#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluscope/collector.hpp"
#include "fluscope/corpus.hpp"
#include "fluscope/learners.hpp"
#include "fluscope/pipeline.hpp"
#include "fluscope/synthetic.hpp"

namespace fluscope::config {

struct CollectorSettings {
  double days = 30.0;
  std::size_t accounts = 1000;
  std::size_t seeds = 100;
  std::uint64_t capacity = 15;
  double window_minutes = 15.0;
  double requery_days = 3.0;
  double latency_seconds = 0.0;
  std::uint64_t fetch_ceiling = 3000;
};

/// Everything a run depends on. Sources in increasing precedence: built-in
/// defaults, the TOML file, FLUSCOPE_* environment variables, command-line flags.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "out";
  int threads = 0;

  // Input: a cohort directory, or the synthetic generator when unset.
  std::optional<std::filesystem::path> data_dir;
  std::optional<StudyWindow> window;
  std::optional<std::filesystem::path> stopwords;
  corpus::ZeroTweetSickPolicy zero_tweet_policy = corpus::ZeroTweetSickPolicy::keep_sick;

  corpus::SyntheticConfig synthetic;

  std::size_t folds = 10;
  std::vector<std::size_t> mined_k = {10, 100};
  std::vector<std::size_t> network_k = {10, 100};
  std::vector<learners::Kind> base_classifiers = {learners::Kind::naive_bayes, learners::Kind::random_forest,
                                                  learners::Kind::decision_tree,
                                                  learners::Kind::logistic_regression, learners::Kind::linear_svm};
  std::size_t vocab_max = 12393;
  pipeline::IgScope ig_scope = pipeline::IgScope::per_fold;
  bool exclude_target = false;
  bool anomaly_hard_label = false;
  double human_epsilon = 0.01;
  double threshold = 0.5;

  std::vector<learners::Kind> meta_classifiers = {learners::Kind::adaboost, learners::Kind::naive_bayes,
                                                  learners::Kind::decision_tree, learners::Kind::logitboost,
                                                  learners::Kind::weighted_vote};

  std::size_t anova_repeats = 10;
  std::size_t anova_folds = 5;
  std::vector<std::size_t> anova_k = {10, 100};
  std::vector<learners::Kind> anova_classifiers = {learners::Kind::naive_bayes, learners::Kind::logistic_regression,
                                                   learners::Kind::decision_tree, learners::Kind::random_forest};

  CollectorSettings collector;

  /// Per-kind hyperparameter overrides applied wherever the kind is trained.
  std::map<learners::Kind, std::map<std::string, learners::HyperValue>> hyperparameters;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  learners::AlgorithmSpec spec(learners::Kind kind) const;
  pipeline::SignalConfig signal_config() const;
  pipeline::AnovaConfig anova_config() const;
  collector::SimulationConfig simulation_config() const;
  corpus::SyntheticConfig synthetic_config() const;
};

using Environment = std::map<std::string, std::string>;

/// FLUSCOPE_* variables of the process environment.
Environment process_environment();

/// Defaults, then the TOML file (if any), then environment overrides.
/// FLUSCOPE_SEED, FLUSCOPE_OUT_DIR and FLUSCOPE_THREADS set top-level keys;
/// FLUSCOPE_<SECTION>_<KEY> sets `key` in [section]. Values are read as TOML
/// values, falling back to plain strings. Unknown keys are ConfigErrors.
ExperimentConfig load(const std::optional<std::filesystem::path>& file, const Environment& env);
ExperimentConfig parse(std::string_view toml_text, const Environment& env = {});

/// The fully resolved configuration as TOML; parse(to_toml(c)) == c.
std::string to_toml(const ExperimentConfig& c);

}  // namespace fluscope::config
