#include "fluscope/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "fluscope/parallel.hpp"
#include "fluscope/rng.hpp"

namespace fluscope::pipeline {

using features::BagCorpus;
using features::TermId;
using meta::Signal;

std::string_view to_string(IgScope s) { return s == IgScope::per_fold ? "per_fold" : "full"; }

IgScope parse_ig_scope(std::string_view s) {
  if (s == "per_fold") return IgScope::per_fold;
  if (s == "full") return IgScope::full;
  throw ConfigError("unknown ig_scope '" + std::string(s) + "' (expected per_fold or full)");
}

learners::AlgorithmSpec seeded_spec(learners::Kind kind, std::uint64_t seed) {
  learners::AlgorithmSpec spec;
  spec.kind = kind;
  spec.rng_seed = derive_seed(seed, "learner", learners::to_string(kind));
  return spec;
}

std::vector<learners::AlgorithmSpec> default_base_classifiers(std::uint64_t seed) {
  using learners::Kind;
  std::vector<learners::AlgorithmSpec> out;
  for (const auto k : {Kind::naive_bayes, Kind::random_forest, Kind::decision_tree, Kind::logistic_regression,
                       Kind::linear_svm})
    out.push_back(seeded_spec(k, seed));
  return out;
}

namespace {

// Stemmed term ids of every cohort tweet in compressed rows.
struct TweetTerms {
  std::vector<std::size_t> offsets{0};
  std::vector<TermId> ids;
  std::vector<std::size_t> chars;

  std::span<const TermId> of(std::size_t t) const { return {ids.data() + offsets[t], offsets[t + 1] - offsets[t]}; }
};

TweetTerms tokenize_all(const corpus::Cohort& cohort, const textprep::StopList& stoplist,
                        features::Lexicon& lexicon) {
  constexpr std::size_t kChunk = 20000;
  const auto& tweets = cohort.tweets();
  TweetTerms out;
  out.chars.resize(tweets.size());
  std::vector<textprep::StemmedDoc> docs;
  for (std::size_t start = 0; start < tweets.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, tweets.size() - start);
    docs.assign(n, {});
    parallel_for(n, [&](std::size_t i) { docs[i] = textprep::preprocess(tweets[start + i].text, stoplist); });
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& s : docs[i].stems) out.ids.push_back(lexicon.intern(s));
      out.offsets.push_back(out.ids.size());
      out.chars[start + i] = docs[i].source_char_count;
    }
  }
  return out;
}

features::Bag bag_of(const TweetTerms& terms, std::span<const std::size_t> refs, std::size_t char_count) {
  std::vector<TermId> all;
  for (const auto t : refs) {
    const auto ids = terms.of(t);
    all.insert(all.end(), ids.begin(), ids.end());
  }
  return features::Bag::from_terms(std::move(all), char_count);
}

std::vector<std::vector<std::size_t>> train_rows(std::span<const std::size_t> fold_of, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    for (std::size_t f = 0; f < k; ++f)
      if (fold_of[i] != f) out[f].push_back(i);
  return out;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

// Information-gain ranking per fold (or one shared ranking).
std::vector<std::vector<features::RankedTerm>> fold_rankings(const BagCorpus& corpus, std::span<const Label> labels,
                                                             std::span<const std::size_t> fold_of, std::size_t k,
                                                             IgScope scope, std::size_t vocab_max) {
  std::vector<std::vector<features::RankedTerm>> out(k);
  if (scope == IgScope::full) {
    const auto rows = all_rows(labels.size());
    const auto ranking = features::rank_by_information_gain(corpus, labels, rows, vocab_max);
    for (auto& r : out) r = ranking;
    return out;
  }
  const auto trains = train_rows(fold_of, k);
  for (std::size_t f = 0; f < k; ++f) out[f] = features::rank_by_information_gain(corpus, labels, trains[f], vocab_max);
  return out;
}

std::vector<TermId> top_terms(const std::vector<features::RankedTerm>& ranking, std::size_t k) {
  if (k > ranking.size())
    throw ConfigError("keyword size " + std::to_string(k) + " exceeds the vocabulary of " +
                      std::to_string(ranking.size()) + " stems");
  std::vector<TermId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranking[i].term);
  return out;
}

// One feature matrix per fold over that fold's selected terms.
std::vector<Dataset> fold_datasets(const BagCorpus& corpus, const Prepared& p,
                                   const std::vector<std::vector<TermId>>& terms, bool rate, const std::string& schema) {
  std::vector<Dataset> out;
  for (std::size_t f = 0; f < terms.size(); ++f) {
    const auto id = schema + "/fold" + std::to_string(f);
    out.push_back(rate ? features::rate_dataset(corpus, p.labels, p.ids, terms[f], id)
                       : features::presence_dataset(corpus, p.labels, p.ids, terms[f], id));
  }
  return out;
}

eval::FoldScorer dataset_scorer(const std::vector<Dataset>& per_fold, std::span<const std::size_t> fold_of,
                                const learners::AlgorithmSpec& spec) {
  return [&per_fold, fold_of, spec](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    const auto& data = per_fold[fold_of[test.front()]];
    const auto model = learners::train(spec, data.subset(train));
    std::vector<double> out;
    out.reserve(test.size());
    for (const auto i : test) out.push_back(model.predict_row(data.row(i)));
    return out;
  };
}

std::string k_variant(std::size_t k) { return "k" + std::to_string(k); }

}  // namespace

Prepared prepare(const corpus::Cohort& cohort, const textprep::StopList& stoplist,
                 corpus::ZeroTweetSickPolicy policy) {
  Prepared p;
  p.months = corpus::partition_user_months(cohort, policy);
  for (const auto& m : p.months) {
    p.ids.push_back(m.id());
    p.labels.push_back(m.label);
  }

  features::Lexicon lexicon;
  for (const auto& k : features::expert_keywords().keywords) lexicon.intern(k);
  const auto terms = tokenize_all(cohort, stoplist, lexicon);

  const std::size_t n = p.months.size();
  p.own.bags.resize(n);
  p.followers.bags.resize(n);
  p.friends.bags.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& m = p.months[i];
    std::size_t chars = 0;
    for (const auto t : m.tweet_refs) chars += terms.chars[t];
    p.own.bags[i] = bag_of(terms, m.tweet_refs, chars);
    for (const auto dir : {corpus::Direction::followers, corpus::Direction::friends}) {
      const auto stream = corpus::assemble_network_stream(cohort, m.user_id, m.month, dir);
      auto& target = dir == corpus::Direction::followers ? p.followers : p.friends;
      target.bags[i] = bag_of(terms, stream.tweet_refs, stream.char_count);
    }
  });
  p.followers.lexicon = lexicon;
  p.friends.lexicon = lexicon;
  p.own.lexicon = std::move(lexicon);
  return p;
}

AnomalySignal compute_anomaly_signal(const Prepared& p, const corpus::Cohort& cohort, const SignalConfig& config) {
  const std::size_t n = p.months.size();
  AnomalySignal out;
  out.z.assign(n, 0.0);
  out.eligible.assign(n, false);
  std::unordered_map<std::string, anomaly::MonthlySeries> series;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = p.months[i];
    auto it = series.find(m.user_id);
    if (it == series.end()) it = series.emplace(m.user_id, anomaly::monthly_series(cohort, m.user_id)).first;
    const auto eligible = anomaly::eligible_months(it->second);
    const bool in = std::any_of(eligible.begin(), eligible.end(), [&](const auto& c) { return c.month == m.month; });
    const std::size_t needed = config.exclude_target ? 3 : 2;
    if (!in || eligible.size() < needed) continue;
    out.z[i] = anomaly::zscore(m.month, it->second, config.exclude_target).z;
    out.eligible[i] = true;
  }

  std::vector<anomaly::Instance> instances;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < n; ++i)
    if (out.eligible[i]) {
      instances.push_back({out.z[i], p.labels[i]});
      index.push_back(i);
    }
  out.fit = anomaly::fit_threshold_loocv(instances);

  auto prob = [&](double z, double thr) {
    if (config.anomaly_hard_label) return is_sick(anomaly::classify(z, thr)) ? 1.0 : 0.0;
    return anomaly::anomaly_probability(z, thr);
  };
  out.probability.assign(n, prob(0.0, out.fit.threshold));
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<double> scores;
  std::vector<double> z_sick, z_not;
  for (std::size_t j = 0; j < index.size(); ++j) {
    const auto i = index[j];
    out.probability[i] = prob(out.z[i], out.fit.fold_thresholds[j]);
    ids.push_back(p.ids[i]);
    labels.push_back(p.labels[i]);
    scores.push_back(out.probability[i]);
    (is_sick(p.labels[i]) ? z_sick : z_not).push_back(out.z[i]);
  }
  out.report = eval::make_report(std::move(ids), std::move(labels), std::move(scores), 0.5);
  if (!z_sick.empty() && !z_not.empty()) out.ks = stats::ks_two_sample(z_sick, z_not);
  return out;
}

BaseSignals compute_base_signals(const Prepared& p, const corpus::Cohort& cohort, const SignalConfig& config) {
  const std::size_t n = p.months.size();
  if (n == 0) throw InsufficientData("the cohort has no seed user-months");
  if (config.classifiers.empty()) throw ConfigError("no base classifiers configured");
  if (!(config.human_epsilon >= 0.0 && config.human_epsilon <= 0.5))
    throw ConfigError("human_epsilon must lie in [0, 0.5]");
  const std::size_t k = config.folds;
  const auto fold_of = eval::stratified_folds(p.labels, k, derive_seed(config.seed, "signals", "folds"));
  BaseSignals out;

  auto run_family = [&](Signal family, const std::vector<Dataset>& per_fold, const std::string& variant) {
    for (const auto& spec : config.classifiers) {
      const auto scores = eval::cross_validate(fold_of, k, dataset_scorer(per_fold, fold_of, spec));
      out.candidates.push_back({family, std::string(learners::to_string(spec.kind)), variant,
                                eval::make_report(p.ids, p.labels, scores, config.threshold)});
    }
  };

  {
    std::vector<TermId> expert;
    for (const auto& kw : features::expert_keywords().keywords) expert.push_back(*p.own.lexicon.find(kw));
    const std::vector<std::vector<TermId>> terms(k, expert);
    run_family(Signal::expert_keywords, fold_datasets(p.own, p, terms, false, features::expert_keywords().schema_id()),
               "");
  }
  {
    const auto rankings = fold_rankings(p.own, p.labels, fold_of, k, config.ig_scope, config.vocab_max);
    for (const auto kk : config.mined_k) {
      std::vector<std::vector<TermId>> terms;
      for (const auto& r : rankings) terms.push_back(top_terms(r, kk));
      run_family(Signal::mined_keywords, fold_datasets(p.own, p, terms, false, "mined/" + k_variant(kk)),
                 k_variant(kk));
    }
  }
  {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = cohort.annotation_for(p.months[i].user_id, p.months[i].month);
      scores[i] = a && *a >= 1 ? 1.0 - config.human_epsilon : config.human_epsilon;
      if (a) {
        ++out.annotated;
        const bool truth = is_sick(p.labels[i]), pred = *a >= 1;
        if (truth && pred) ++out.human_confusion.tp;
        else if (truth) ++out.human_confusion.fn;
        else if (pred) ++out.human_confusion.fp;
        else ++out.human_confusion.tn;
      }
    }
    out.candidates.push_back(
        {Signal::human, "annotation", "", eval::make_report(p.ids, p.labels, scores, config.threshold)});
  }
  {
    out.anomaly = compute_anomaly_signal(p, cohort, config);
    out.candidates.push_back({Signal::anomaly, "zscore", "",
                              eval::make_report(p.ids, p.labels, out.anomaly.probability, config.threshold)});
  }
  for (const auto dir : {corpus::Direction::followers, corpus::Direction::friends}) {
    const auto& corpus = p.stream(dir);
    const auto rankings = fold_rankings(corpus, p.labels, fold_of, k, config.ig_scope, config.vocab_max);
    for (const auto kk : config.network_k) {
      std::vector<std::vector<TermId>> terms;
      for (const auto& r : rankings) terms.push_back(top_terms(r, kk));
      const auto variant = std::string(corpus::to_string(dir)) + "-" + k_variant(kk);
      run_family(Signal::network, fold_datasets(corpus, p, terms, true, "network/" + variant), variant);
    }
  }

  std::vector<meta::FamilyEval> evals;
  std::vector<std::string> order, families;
  for (const auto& c : out.candidates) {
    evals.push_back({std::string(meta::to_string(c.family)), c.label(), c.report.auc});
    order.push_back(c.label());
  }
  for (const auto s : meta::all_signals()) families.emplace_back(meta::to_string(s));
  const auto chosen = meta::select_best_per_family(evals, families, order);
  for (std::size_t c = 0; c < out.candidates.size(); ++c) {
    const auto& cand = out.candidates[c];
    if (chosen.at(std::string(meta::to_string(cand.family))) == cand.label() && !out.selected.contains(cand.family))
      out.selected[cand.family] = c;
  }

  out.bundles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.bundles[i].instance_id = p.ids[i];
    for (const auto s : meta::all_signals()) {
      const auto& report = out.best(s).report;
      if (report.ids[i] != p.ids[i]) throw DataError("held-out prediction order differs for " + p.ids[i]);
      out.bundles[i].set(s, report.scores[i]);
    }
  }
  return out;
}

MetaResult run_meta(const BaseSignals& signals, const Prepared& p, std::span<const learners::AlgorithmSpec> meta_specs,
                    double threshold) {
  const auto data = meta::build_meta_dataset(signals.bundles, p.labels);
  MetaResult out;
  for (const auto& spec : meta_specs)
    out.rows.push_back({std::string(learners::to_string(spec.kind)), meta::evaluate_meta(spec, data, threshold)});
  out.baseline = signals.best(Signal::mined_keywords);
  for (const auto s : meta::all_signals()) {
    std::vector<double> col(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) col[i] = data.at(i, static_cast<std::size_t>(s));
    out.signal_auc[s] = eval::auc(col, data.labels());
    out.best_single_auc = std::max(out.best_single_auc, out.signal_auc[s]);
  }
  return out;
}

NetworkAnova network_anova(const Prepared& p, const AnovaConfig& config) {
  if (config.repeats == 0 || config.k.empty())
    throw ConfigError("the network ANOVA needs repeats and keyword sizes");
  auto specs = config.classifiers;
  if (specs.empty())
    for (const auto k : {learners::Kind::naive_bayes, learners::Kind::logistic_regression,
                         learners::Kind::decision_tree, learners::Kind::random_forest})
      specs.push_back(seeded_spec(k, config.seed));
  const std::array<corpus::Direction, 2> sources = {corpus::Direction::followers, corpus::Direction::friends};
  const std::size_t per_task = config.k.size() * specs.size();
  const std::size_t tasks = sources.size() * config.repeats;
  std::vector<AnovaObservation> obs(tasks * per_task);

  parallel_for(tasks, [&](std::size_t task) {
    const auto dir = sources[task / config.repeats];
    const std::size_t r = task % config.repeats;
    const auto& corpus = p.stream(dir);
    const auto fold_of = eval::stratified_folds(p.labels, config.folds, eval::repeat_seed(config.seed, r));
    const auto rankings =
        fold_rankings(corpus, p.labels, fold_of, config.folds, IgScope::per_fold, config.vocab_max);
    for (std::size_t ki = 0; ki < config.k.size(); ++ki) {
      std::vector<std::vector<TermId>> terms;
      for (const auto& rk : rankings) terms.push_back(top_terms(rk, config.k[ki]));
      const auto per_fold = fold_datasets(corpus, p, terms, true, "anova/" + k_variant(config.k[ki]));
      for (std::size_t ci = 0; ci < specs.size(); ++ci) {
        const auto& spec = specs[ci];
        const auto scores =
            eval::serial::cross_validate(fold_of, config.folds, dataset_scorer(per_fold, fold_of, spec));
        obs[task * per_task + ki * specs.size() + ci] = {dir, config.k[ki], spec.kind, r,
                                                                       eval::auc(scores, p.labels)};
      }
    }
  });

  NetworkAnova out;
  std::vector<double> y;
  stats::Factor source{"Source", {}}, size{"Keyword Size", {}}, classifier{"Classifier", {}};
  double sum_f = 0, sum_r = 0;
  std::size_t n_f = 0, n_r = 0;
  for (const auto& o : obs) {
    y.push_back(o.auc);
    source.levels.emplace_back(corpus::to_string(o.source));
    size.levels.push_back(std::to_string(o.k));
    classifier.levels.emplace_back(learners::to_string(o.classifier));
    if (o.source == corpus::Direction::followers) {
      sum_f += o.auc;
      ++n_f;
    } else {
      sum_r += o.auc;
      ++n_r;
    }
  }
  std::vector<stats::Factor> factors{source};
  if (config.k.size() > 1) factors.push_back(size);
  if (specs.size() > 1) factors.push_back(classifier);
  out.table = stats::anova(y, factors);
  out.mean_auc_followers = sum_f / static_cast<double>(n_f);
  out.mean_auc_friends = sum_r / static_cast<double>(n_r);
  out.observations = std::move(obs);
  return out;
}

std::vector<KeywordTest> expert_keyword_tests(const Prepared& p) {
  std::vector<KeywordTest> out;
  for (const auto& kw : features::expert_keywords().keywords) {
    KeywordTest t;
    t.keyword = kw;
    const auto id = p.own.lexicon.find(kw);
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
      const bool present = id && p.own.bags[i].count_of(*id) > 0;
      if (is_sick(p.labels[i])) {
        (present ? t.table.a : t.table.b) += 1;
      } else {
        (present ? t.table.c : t.table.d) += 1;
      }
    }
    t.months_present = t.table.a + t.table.c;
    t.odds_ratio = stats::odds_ratio(t.table);
    t.p_value = stats::fisher_exact(t.table).p_value;
    out.push_back(t);
  }
  return out;
}

std::map<YearMonth, std::size_t> diagnosis_histogram(const corpus::Cohort& cohort) {
  std::map<YearMonth, std::size_t> out;
  for (const auto m : cohort.window().months()) out[m] = 0;
  for (const auto& u : cohort.users())
    if (u.diagnosed_month) ++out[*u.diagnosed_month];
  return out;
}

}  // namespace fluscope::pipeline
