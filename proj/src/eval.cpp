#include "fluscope/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluscope/parallel.hpp"
#include "fluscope/rng.hpp"

namespace fluscope::eval {

double ConfusionMatrix::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double ConfusionMatrix::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ConfusionMatrix::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionMatrix::f1() const {
  return tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

namespace {

void check_scores(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw ConfigError("score and label counts differ");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw DataError("NaN score at instance " + std::to_string(i));
    pos += is_sick(labels[i]) ? 1 : 0;
  }
  if (pos == 0 || pos == labels.size()) throw InsufficientData("ROC analysis needs both sick and not-sick instances");
}

// Walks score groups from high to low, calling visit(tp_group, fp_group).
template <class Visit>
void sweep_groups(std::span<const double> scores, std::span<const Label> labels, Visit&& visit) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t tp = 0, fp = 0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (is_sick(labels[order[j]]) ? tp : fp) += 1;
      ++j;
    }
    visit(tp, fp);
    i = j;
  }
}

}  // namespace

RocResult roc_and_auc(std::span<const double> scores, std::span<const Label> labels) {
  check_scores(scores, labels);
  std::uint64_t P = 0;
  for (const auto l : labels) P += is_sick(l) ? 1 : 0;
  const std::uint64_t N = labels.size() - P;
  RocResult r;
  r.curve.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, twice_area = 0;
  sweep_groups(scores, labels, [&](std::uint64_t gtp, std::uint64_t gfp) {
    twice_area += gfp * (2 * tp + gtp);
    tp += gtp;
    fp += gfp;
    r.curve.push_back({static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P)});
  });
  r.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
  return r;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  check_scores(scores, labels);
  std::uint64_t P = 0;
  for (const auto l : labels) P += is_sick(l) ? 1 : 0;
  const std::uint64_t N = labels.size() - P;
  std::uint64_t tp = 0, twice_area = 0;
  sweep_groups(scores, labels, [&](std::uint64_t gtp, std::uint64_t gfp) {
    twice_area += gfp * (2 * tp + gtp);
    tp += gtp;
  });
  return static_cast<double>(twice_area) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

double pairwise_auc(std::span<const double> scores, std::span<const Label> labels) {
  check_scores(scores, labels);
  std::uint64_t twice_wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!is_sick(labels[i])) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (is_sick(labels[j])) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        twice_wins += 2;
      } else if (scores[i] == scores[j]) {
        twice_wins += 1;
      }
    }
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
}

ConfusionMatrix confusion_of(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) throw ConfigError("truth and prediction counts differ");
  ConfusionMatrix c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = is_sick(truth[i]), p = is_sick(predicted[i]);
    if (t && p) ++c.tp;
    else if (t) ++c.fn;
    else if (p) ++c.fp;
    else ++c.tn;
  }
  return c;
}

Metrics f1_accuracy_confusion(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  if (scores.size() != labels.size()) throw ConfigError("score and label counts differ");
  std::vector<Label> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] > threshold ? Label::sick : Label::not_sick;
  Metrics m;
  m.confusion = confusion_of(labels, predicted);
  m.f1 = m.confusion.f1();
  m.accuracy = m.confusion.accuracy();
  return m;
}

EvalReport make_report(std::vector<std::string> ids, std::vector<Label> labels, std::vector<double> scores,
                       double threshold) {
  EvalReport r;
  r.roc = roc_and_auc(scores, labels);
  r.auc = r.roc.auc;
  const auto m = f1_accuracy_confusion(scores, labels, threshold);
  r.accuracy = m.accuracy;
  r.f1 = m.f1;
  r.confusion = m.confusion;
  r.threshold = threshold;
  r.ids = std::move(ids);
  r.labels = std::move(labels);
  r.scores = std::move(scores);
  return r;
}

std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2 || k > n)
    throw ConfigError("fold count " + std::to_string(k) + " must lie in [2, " + std::to_string(n) + "]");
  Rng rng(derive_seed(seed, "eval", "folds"));
  std::vector<std::size_t> sick, not_sick;
  for (std::size_t i = 0; i < n; ++i) (is_sick(labels[i]) ? sick : not_sick).push_back(i);
  rng.shuffle(sick.begin(), sick.end());
  rng.shuffle(not_sick.begin(), not_sick.end());
  std::vector<std::size_t> fold(n);
  std::size_t next = 0;
  for (const auto i : sick) fold[i] = next++ % k;
  for (const auto i : not_sick) fold[i] = next++ % k;
  return fold;
}

namespace {

std::vector<std::vector<std::size_t>> fold_members(std::span<const std::size_t> fold_of, std::size_t k, bool train) {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if ((fold_of[i] == f) != train) out[f].push_back(i);
  return out;
}

std::vector<double> run_folds(std::span<const std::size_t> fold_of, std::size_t k, const FoldScorer& scorer,
                              bool parallel) {
  const auto tests = fold_members(fold_of, k, false);
  const auto trains = fold_members(fold_of, k, true);
  std::vector<std::vector<double>> results(k);
  auto body = [&](std::size_t f) {
    if (tests[f].empty()) return;
    results[f] = scorer(trains[f], tests[f]);
    if (results[f].size() != tests[f].size()) throw ConfigError("fold scorer returned the wrong number of scores");
  };
  if (parallel) {
    parallel_for(k, body);
  } else {
    for (std::size_t f = 0; f < k; ++f) body(f);
  }
  std::vector<double> scores(fold_of.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t t = 0; t < tests[f].size(); ++t) scores[tests[f][t]] = results[f][t];
  return scores;
}

FoldScorer learner_scorer(const Dataset& data, const learners::AlgorithmSpec& spec) {
  return [&data, spec](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    const auto model = learners::train(spec, data.subset(train));
    std::vector<double> out;
    out.reserve(test.size());
    for (const auto i : test) out.push_back(model.predict_row(data.row(i)));
    return out;
  };
}

void require_both_classes(const Dataset& data) {
  const auto s = data.count(Label::sick);
  if (s == 0 || s == data.size()) throw InsufficientData("cross-validation needs both sick and not-sick instances");
}

std::vector<double> repeated(const Dataset& data, const learners::AlgorithmSpec& spec, std::size_t repeats,
                             std::size_t k, std::uint64_t seed, bool parallel) {
  require_both_classes(data);
  std::vector<double> aucs(repeats);
  auto body = [&](std::size_t r) {
    const auto folds = stratified_folds(data.labels(), k, repeat_seed(seed, r));
    const auto scores = run_folds(folds, k, learner_scorer(data, spec), false);
    aucs[r] = auc(scores, data.labels());
  };
  if (parallel) {
    parallel_for(repeats, body);
  } else {
    for (std::size_t r = 0; r < repeats; ++r) body(r);
  }
  return aucs;
}

}  // namespace

std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) { return derive_seed(seed, "eval", "repeat", repeat); }

std::vector<double> cross_validate(std::span<const std::size_t> fold_of, std::size_t k, const FoldScorer& scorer) {
  return run_folds(fold_of, k, scorer, true);
}

std::vector<double> k_fold_cv(const Dataset& data, std::size_t k, const learners::AlgorithmSpec& spec,
                              std::uint64_t seed) {
  require_both_classes(data);
  return cross_validate(stratified_folds(data.labels(), k, seed), k, learner_scorer(data, spec));
}

std::vector<double> loocv(const Dataset& data, const learners::AlgorithmSpec& spec) {
  require_both_classes(data);
  std::vector<std::size_t> folds(data.size());
  std::iota(folds.begin(), folds.end(), 0);
  return cross_validate(folds, data.size(), learner_scorer(data, spec));
}

std::vector<double> repeated_cv_auc_distribution(const Dataset& data, const learners::AlgorithmSpec& spec,
                                                 std::size_t repeats, std::size_t k, std::uint64_t seed) {
  return repeated(data, spec, repeats, k, seed, true);
}

namespace serial {

std::vector<double> cross_validate(std::span<const std::size_t> fold_of, std::size_t k, const FoldScorer& scorer) {
  return run_folds(fold_of, k, scorer, false);
}

std::vector<double> k_fold_cv(const Dataset& data, std::size_t k, const learners::AlgorithmSpec& spec,
                              std::uint64_t seed) {
  require_both_classes(data);
  return serial::cross_validate(stratified_folds(data.labels(), k, seed), k, learner_scorer(data, spec));
}

std::vector<double> repeated_cv_auc_distribution(const Dataset& data, const learners::AlgorithmSpec& spec,
                                                 std::size_t repeats, std::size_t k, std::uint64_t seed) {
  return repeated(data, spec, repeats, k, seed, false);
}

}  // namespace serial

}  // namespace fluscope::eval
