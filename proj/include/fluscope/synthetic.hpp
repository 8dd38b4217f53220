#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluscope/corpus.hpp"

namespace fluscope::corpus {

/// A word (or short phrase) planted into tweets. `signal_probability` applies
/// per tweet in the months that carry the effect; `background_probability`
/// applies per tweet everywhere else.
struct KeywordInjection {
  std::string text;
  double signal_probability = 0.0;
  double background_probability = 0.0;
};

/// Parameters of the synthetic cohort. Defaults are calibrated to the cohort
/// marginals of the original study: 104 of 226 users diagnosed, and 17 of 35
/// sick users posting about it.
struct SyntheticConfig {
  std::uint64_t rng_seed = 7;
  int n_seed_users = 226;
  double sick_fraction = 104.0 / 226.0;
  double self_report_rate = 17.0 / 35.0;
  StudyWindow window{{2012, 9}, {2013, 4}};

  // Seed posting rates: per-user mean drawn log-normally around the cohort
  // mean, monthly counts negative binomial around the user mean.
  double mean_monthly_tweets = 40.0;
  double user_rate_spread = 0.5;
  double dispersion = 12.0;
  double sick_rate_multiplier = 0.45;

  // Text model.
  int background_vocabulary = 3000;
  double zipf_exponent = 1.05;
  double tokens_per_tweet = 9.0;
  double stopword_fraction = 0.3;
  std::vector<KeywordInjection> sick_vocabulary = default_sick_vocabulary();
  std::vector<std::string> self_report_phrases = default_self_report_phrases();

  // Network periphery.
  double mean_followers = 5.0;
  double mean_friends = 5.0;
  int celebrity_accounts = 15;
  double mean_celebrities_followed = 3.0;
  double periphery_monthly_tweets = 6.0;
  double celebrity_monthly_tweets = 80.0;
  std::vector<KeywordInjection> network_vocabulary = default_network_vocabulary();
  /// Scales network_vocabulary signal probabilities for followers / personal friends.
  double follower_signal_scale = 1.0;
  double friend_signal_scale = 0.35;

  static std::vector<KeywordInjection> default_sick_vocabulary();
  static std::vector<KeywordInjection> default_network_vocabulary();
  static std::vector<std::string> default_self_report_phrases();

  /// Throws ConfigError when a probability leaves [0,1] or a rate is not positive.
  void validate() const;
};

/// Pure function of the config (seed included).
Cohort generate_synthetic_cohort(const SyntheticConfig& config);

}  // namespace fluscope::corpus
