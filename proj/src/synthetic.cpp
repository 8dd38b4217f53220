#include "fluscope/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fluscope/rng.hpp"
#include "fluscope/textprep.hpp"

namespace fluscope::corpus {

std::vector<KeywordInjection> SyntheticConfig::default_sick_vocabulary() {
  return {
      {"flu", 0.035, 0.0008},      {"sick", 0.05, 0.006},       {"fever", 0.025, 0.0005},
      {"coughing", 0.025, 0.001},  {"medicine", 0.02, 0.0006},  {"cold", 0.02, 0.01},
      {"health", 0.02, 0.002},     {"recovering", 0.02, 0.0005}, {"tired", 0.03, 0.01},
      {"doctor", 0.02, 0.001},     {"bed", 0.025, 0.005},       {"soup", 0.015, 0.001},
      {"influenza", 0.0, 0.0001},
  };
}

std::vector<KeywordInjection> SyntheticConfig::default_network_vocabulary() {
  return {
      {"get well soon", 0.05, 0.002},
      {"feel better", 0.04, 0.003},
      {"hope you recover", 0.02, 0.0005},
      {"flu", 0.015, 0.001},
      {"sick", 0.02, 0.006},
  };
}

std::vector<std::string> SyntheticConfig::default_self_report_phrases() {
  return {
      "I have the flu",
      "home sick with a fever",
      "this flu is killing me",
      "stuck in bed sick again",
      "doctor says it's the flu",
      "should have gotten a flu shot",
  };
}

void SyntheticConfig::validate() const {
  auto prob = [](double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(what + " must lie in [0,1]");
  };
  auto positive = [](double v, const std::string& what) {
    if (!(v > 0.0)) throw ConfigError(what + " must be positive");
  };
  if (n_seed_users < 0) throw ConfigError("n_seed_users must be non-negative");
  prob(sick_fraction, "sick_fraction");
  prob(self_report_rate, "self_report_rate");
  prob(stopword_fraction, "stopword_fraction");
  positive(mean_monthly_tweets, "mean_monthly_tweets");
  positive(dispersion, "dispersion");
  positive(sick_rate_multiplier, "sick_rate_multiplier");
  positive(tokens_per_tweet, "tokens_per_tweet");
  positive(zipf_exponent, "zipf_exponent");
  positive(periphery_monthly_tweets, "periphery_monthly_tweets");
  positive(celebrity_monthly_tweets, "celebrity_monthly_tweets");
  if (user_rate_spread < 0.0) throw ConfigError("user_rate_spread must be non-negative");
  if (background_vocabulary < 1) throw ConfigError("background_vocabulary must be at least 1");
  if (mean_followers < 0.0 || mean_friends < 0.0 || mean_celebrities_followed < 0.0)
    throw ConfigError("network size means must be non-negative");
  if (celebrity_accounts < 0) throw ConfigError("celebrity_accounts must be non-negative");
  if (follower_signal_scale < 0.0 || friend_signal_scale < 0.0)
    throw ConfigError("network signal scales must be non-negative");
  for (const auto& k : sick_vocabulary) {
    prob(k.signal_probability, "sick vocabulary probability for '" + k.text + "'");
    prob(k.background_probability, "sick vocabulary background probability for '" + k.text + "'");
  }
  for (const auto& k : network_vocabulary) {
    prob(std::min(1.0, k.signal_probability * std::max(follower_signal_scale, friend_signal_scale)),
         "network vocabulary probability for '" + k.text + "'");
    prob(k.background_probability, "network vocabulary background probability for '" + k.text + "'");
  }
  if (window.last < window.first) throw ConfigError("study window ends before it starts");
}

namespace {

constexpr std::array<std::string_view, 20> kFillerWords = {
    "the", "i", "a", "to", "and", "is", "my", "so", "it", "you",
    "of", "in", "on", "for", "me", "this", "that", "just", "with", "at"};

std::vector<std::string> make_background_words(std::uint64_t seed, int count,
                                               const std::set<std::string>& reserved_stems) {
  static constexpr std::string_view onsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n",
                                                "p", "r", "s", "t", "v", "w", "z", "br", "st", "tr", "pl"};
  static constexpr std::string_view vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  static constexpr std::string_view codas[] = {"", "", "", "n", "r", "s", "t", "m", "l"};
  static constexpr std::string_view endings[] = {"", "", "", "", "s", "ing", "ed", "er", "ly", "ness"};
  Rng rng(seed);
  std::set<std::string> seen;
  std::set<std::string> seen_stems = reserved_stems;
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < count) {
    std::string w;
    const int syllables = 1 + static_cast<int>(rng.below(3));
    for (int s = 0; s < syllables; ++s) {
      w += onsets[rng.below(std::size(onsets))];
      w += vowels[rng.below(std::size(vowels))];
      w += codas[rng.below(std::size(codas))];
    }
    w += endings[rng.below(std::size(endings))];
    if (w.size() < 3 || seen.contains(w)) continue;
    const auto st = textprep::stem(w);
    if (seen_stems.contains(st)) continue;
    seen.insert(w);
    seen_stems.insert(st);
    words.push_back(std::move(w));
  }
  return words;
}

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cdf_[i] = total;
    }
    for (auto& c : cdf_) c /= total;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

struct ActiveInjection {
  const std::string* text;
  double probability;
};

class TweetWriter {
 public:
  TweetWriter(const SyntheticConfig& c, std::vector<std::string> words)
      : config_(c), words_(std::move(words)), zipf_(words_.size(), c.zipf_exponent) {}

  std::string write(Rng& rng, const std::vector<ActiveInjection>& injections) const {
    std::vector<std::string> tokens;
    const auto n = 1 + rng.poisson(config_.tokens_per_tweet - 1.0);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (rng.bernoulli(config_.stopword_fraction))
        tokens.emplace_back(kFillerWords[rng.below(kFillerWords.size())]);
      else
        tokens.push_back(words_[zipf_.draw(rng)]);
    }
    for (const auto& inj : injections) {
      if (!rng.bernoulli(inj.probability)) continue;
      const auto pos = rng.below(tokens.size() + 1);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), *inj.text);
    }
    return decorate(rng, tokens);
  }

  std::string decorate(Rng& rng, std::vector<std::string>& tokens) const {
    static constexpr std::string_view endings[] = {"", "", ".", "!", "?", "!!", " :("};
    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto& t = tokens[i];
      if (rng.bernoulli(0.04))
        for (auto& ch : t) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (i == 0 && rng.bernoulli(0.5) && !t.empty())
        t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
      if (i > 0) text += rng.bernoulli(0.06) ? ", " : " ";
      text += t;
    }
    text += endings[rng.below(std::size(endings))];
    return text;
  }

 private:
  const SyntheticConfig& config_;
  std::vector<std::string> words_;
  ZipfSampler zipf_;
};

std::vector<double> season_weights(std::size_t months) {
  // Bell-shaped season peaking about 60% of the way through the window.
  std::vector<double> w(months);
  const double centre = 0.6 * static_cast<double>(months - 1);
  const double width = std::max(1.0, static_cast<double>(months) / 4.0);
  for (std::size_t i = 0; i < months; ++i) {
    const double d = (static_cast<double>(i) - centre) / width;
    w[i] = std::exp(-0.5 * d * d);
  }
  return w;
}

std::size_t draw_weighted(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

std::int64_t random_instant(Rng& rng, YearMonth m) {
  const auto begin = m.start_seconds();
  const auto span = m.next().start_seconds() - begin;
  return begin + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

Cohort generate_synthetic_cohort(const SyntheticConfig& c) {
  c.validate();
  const auto months = c.window.months();
  const std::size_t n_seed = static_cast<std::size_t>(c.n_seed_users);

  std::set<std::string> reserved;
  for (auto w : kFillerWords) reserved.insert(textprep::stem(std::string(w)));
  auto reserve_all = [&](std::string_view phrase) {
    for (const auto& tok : textprep::tokenize(phrase)) reserved.insert(textprep::stem(textprep::to_lower(tok)));
  };
  for (const auto& k : c.sick_vocabulary) reserve_all(k.text);
  for (const auto& k : c.network_vocabulary) reserve_all(k.text);
  for (const auto& p : c.self_report_phrases) reserve_all(p);
  const TweetWriter writer(
      c, make_background_words(derive_seed(c.rng_seed, "synthetic", "vocabulary"), c.background_vocabulary, reserved));

  // Who is sick, when, and who talks about it.
  Rng design(derive_seed(c.rng_seed, "synthetic", "design"));
  const auto n_sick = static_cast<std::size_t>(std::llround(static_cast<double>(n_seed) * c.sick_fraction));
  std::vector<std::size_t> order(n_seed);
  for (std::size_t i = 0; i < n_seed; ++i) order[i] = i;
  design.shuffle(order.begin(), order.end());
  std::vector<std::optional<std::size_t>> sick_month(n_seed);
  const auto weights = season_weights(months.size());
  for (std::size_t k = 0; k < n_sick; ++k) sick_month[order[k]] = draw_weighted(design, weights);
  std::vector<bool> reporter(n_seed, false);
  {
    std::vector<std::size_t> sick_users(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_sick));
    std::sort(sick_users.begin(), sick_users.end());
    design.shuffle(sick_users.begin(), sick_users.end());
    const auto n_report = static_cast<std::size_t>(std::llround(static_cast<double>(n_sick) * c.self_report_rate));
    for (std::size_t k = 0; k < n_report && k < sick_users.size(); ++k) reporter[sick_users[k]] = true;
  }

  std::vector<UserRecord> users;
  std::vector<TweetRecord> tweets;
  std::vector<EdgeRecord> edges;
  std::vector<AnnotationRecord> annotations;
  const int width = n_seed >= 1000 ? 4 : 3;
  std::vector<std::string> seed_ids(n_seed);
  for (std::size_t i = 0; i < n_seed; ++i) {
    seed_ids[i] = numbered("u", i, width);
    users.push_back({seed_ids[i], sick_month[i] ? std::optional(months[*sick_month[i]]) : std::nullopt, true});
  }

  auto emit_month = [&](Rng& rng, const std::string& author, YearMonth m, std::uint64_t count,
                        const std::vector<ActiveInjection>& inj, std::vector<std::string> extra = {}) {
    std::vector<TweetRecord> batch;
    for (std::uint64_t k = 0; k < count; ++k) batch.push_back({author, random_instant(rng, m), writer.write(rng, inj)});
    for (auto& text : extra) batch.push_back({author, random_instant(rng, m), std::move(text)});
    std::stable_sort(batch.begin(), batch.end(),
                     [](const TweetRecord& a, const TweetRecord& b) { return a.timestamp < b.timestamp; });
    for (auto& t : batch) tweets.push_back(std::move(t));
  };

  std::vector<ActiveInjection> sick_on, sick_off;
  for (const auto& k : c.sick_vocabulary) {
    sick_on.push_back({&k.text, k.signal_probability});
    sick_off.push_back({&k.text, k.background_probability});
  }

  // Seed timelines.
  for (std::size_t i = 0; i < n_seed; ++i) {
    Rng rng(derive_seed(c.rng_seed, "synthetic", "seed-user", i));
    const double user_mean = c.mean_monthly_tweets * std::exp(c.user_rate_spread * rng.normal() -
                                                              0.5 * c.user_rate_spread * c.user_rate_spread);
    std::optional<std::size_t> control_month;
    if (n_sick > 0 && months.size() > 1) control_month = rng.below(months.size());
    for (std::size_t mi = 0; mi < months.size(); ++mi) {
      const bool sick = sick_month[i] && *sick_month[i] == mi;
      const double mean = sick ? user_mean * c.sick_rate_multiplier : user_mean;
      const auto count = rng.negative_binomial(mean, c.dispersion);
      std::vector<std::string> reports;
      if (sick && reporter[i] && !c.self_report_phrases.empty()) {
        const auto n_reports = 1 + rng.poisson(0.7);
        for (std::uint64_t r = 0; r < n_reports; ++r) {
          std::vector<std::string> tokens{c.self_report_phrases[rng.below(c.self_report_phrases.size())]};
          reports.push_back(writer.decorate(rng, tokens));
        }
      }
      const auto n_reports = static_cast<int>(reports.size());
      emit_month(rng, seed_ids[i], months[mi], count, sick ? sick_on : sick_off, std::move(reports));
      if (sick) {
        annotations.push_back({seed_ids[i], months[mi], n_reports});
      } else if (control_month && *control_month == mi && !sick_month[i]) {
        annotations.push_back({seed_ids[i], months[mi], 0});
      }
    }
  }

  // Network periphery: personal followers and friends, plus shared high-volume accounts.
  std::vector<std::string> celebrity_ids;
  for (int k = 0; k < c.celebrity_accounts; ++k) celebrity_ids.push_back(numbered("celeb", static_cast<std::size_t>(k), 2));

  auto injections = [&](bool active, double scale) {
    std::vector<ActiveInjection> out;
    for (const auto& k : c.network_vocabulary)
      out.push_back({&k.text, active ? std::min(1.0, k.signal_probability * scale) : k.background_probability});
    return out;
  };
  const auto quiet = injections(false, 0.0);
  const auto follower_loud = injections(true, c.follower_signal_scale);
  const auto friend_loud = injections(true, c.friend_signal_scale);

  for (std::size_t i = 0; i < n_seed; ++i) {
    Rng rng(derive_seed(c.rng_seed, "synthetic", "periphery", i));
    const auto n_followers = rng.poisson(c.mean_followers);
    const auto n_friends = rng.poisson(c.mean_friends);
    auto celebrity_count = std::min<std::uint64_t>(rng.poisson(c.mean_celebrities_followed), celebrity_ids.size());
    std::vector<std::size_t> celebs(celebrity_ids.size());
    for (std::size_t k = 0; k < celebs.size(); ++k) celebs[k] = k;
    rng.shuffle(celebs.begin(), celebs.end());
    celebs.resize(celebrity_count);
    std::sort(celebs.begin(), celebs.end());

    auto add_account = [&](const std::string& id, bool follower) {
      users.push_back({id, std::nullopt, false});
      if (follower)
        edges.push_back({id, seed_ids[i]});
      else
        edges.push_back({seed_ids[i], id});
      const double rate = c.periphery_monthly_tweets;
      for (std::size_t mi = 0; mi < months.size(); ++mi) {
        const bool active = sick_month[i] && *sick_month[i] == mi;
        const auto count = rng.negative_binomial(rate, 2.0);
        emit_month(rng, id, months[mi], count, active ? (follower ? follower_loud : friend_loud) : quiet);
      }
    };
    for (std::uint64_t k = 0; k < n_followers; ++k) add_account(seed_ids[i] + numbered("_fo", k, 2), true);
    for (std::uint64_t k = 0; k < n_friends; ++k) add_account(seed_ids[i] + numbered("_fr", k, 2), false);
    for (auto k : celebs) edges.push_back({seed_ids[i], celebrity_ids[k]});
  }

  for (std::size_t k = 0; k < celebrity_ids.size(); ++k) {
    Rng rng(derive_seed(c.rng_seed, "synthetic", "celebrity", k));
    users.push_back({celebrity_ids[k], std::nullopt, false});
    for (const auto m : months) emit_month(rng, celebrity_ids[k], m, rng.negative_binomial(c.celebrity_monthly_tweets, 4.0), quiet);
  }

  return Cohort(c.window, std::move(users), std::move(tweets), std::move(edges), std::move(annotations));
}

}  // namespace fluscope::corpus
