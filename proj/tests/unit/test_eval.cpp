#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "fluscope/eval.hpp"
#include "fluscope/rng.hpp"
#include "fluscope/stats.hpp"
#include "oracles.hpp"

using namespace fluscope;
using namespace fluscope::eval;

namespace {

std::vector<Label> labels_from(std::initializer_list<int> v) {
  std::vector<Label> out;
  for (int x : v) out.push_back(x ? Label::sick : Label::not_sick);
  return out;
}

Dataset noisy_dataset(std::uint64_t seed, std::size_t n, double positive_share) {
  Rng rng(seed);
  Dataset d("noisy", 2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool sick = static_cast<double>(i) < positive_share * static_cast<double>(n);
    const double x[2] = {rng.normal() + (sick ? 1.0 : 0.0), rng.normal()};
    d.add(x, sick ? Label::sick : Label::not_sick, "i" + std::to_string(i));
  }
  return d;
}

learners::AlgorithmSpec nb() { return learners::AlgorithmSpec{learners::Kind::naive_bayes, {}, 1}; }

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("auc edge cases") {
  const auto y = labels_from({0, 0, 1, 1});
  const std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
  CHECK(auc(perfect, y) == 1.0);
  const std::vector<double> flat(4, 0.3);
  CHECK(auc(flat, y) == 0.5);
  const auto roc = roc_and_auc(perfect, y);
  CHECK(roc.curve.front().fpr == 0.0);
  CHECK(roc.curve.back().tpr == 1.0);
  const auto one_class = labels_from({1, 1});
  const std::vector<double> two{0.1, 0.2};
  CHECK_THROWS_AS(auc(two, one_class), InsufficientData);
  const std::vector<double> with_nan{0.1, std::nan(""), 0.2, 0.3};
  CHECK_THROWS_AS(auc(with_nan, y), DataError);
}

TEST_CASE("trapezoidal and pairwise auc agree") {
  Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.4) ? Label::sick : Label::not_sick;
      s[i] = rep % 3 == 0 ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
    }
    y[0] = Label::sick;
    y[1] = Label::not_sick;
    const double trap = auc(s, y);
    CHECK(std::abs(trap - pairwise_auc(s, y)) <= 1e-12);
    CHECK(std::abs(trap - oracle::pairwise_auc(s, y)) <= 1e-12);
    CHECK(std::abs(trap - roc_and_auc(s, y).auc) <= 1e-12);
    std::vector<double> mono(n);
    for (std::size_t i = 0; i < n; ++i) mono[i] = std::exp(3.0 * s[i]) - 7.0;
    CHECK(std::abs(auc(mono, y) - trap) <= 1e-12);
  }
}

TEST_CASE("published confusion counts") {
  const ConfusionMatrix table3{14, 25, 27, 192};
  CHECK(table3.f1() == 0.35);
  CHECK(table3.accuracy() == doctest::Approx(206.0 / 258.0));
  // Annotation channel: 17 of 35 sick users flagged, no false alarms.
  const ConfusionMatrix table2{17, 18, 0, 66};
  CHECK(table2.precision() == 1.0);
  CHECK(table2.recall() == 17.0 / 35.0);
}

TEST_CASE("f1 accuracy confusion") {
  const auto y = labels_from({1, 1, 0, 0});
  const std::vector<double> right{0.9, 0.6, 0.1, 0.5};
  const auto m = f1_accuracy_confusion(right, y);
  CHECK(m.f1 == 1.0);
  CHECK(m.accuracy == 1.0);
  const std::vector<double> none{0.1, 0.2, 0.3, 0.4};
  CHECK(f1_accuracy_confusion(none, y).f1 == 0.0);
  CHECK(f1_accuracy_confusion(none, y).confusion.precision() == 0.0);

  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> s(30);
    std::vector<Label> l(30);
    for (std::size_t i = 0; i < 30; ++i) {
      s[i] = rng.uniform();
      l[i] = rng.bernoulli(0.5) ? Label::sick : Label::not_sick;
    }
    const auto r = f1_accuracy_confusion(s, l, 0.4);
    const auto& c = r.confusion;
    CHECK(c.total() == 30);
    CHECK(r.accuracy == double(c.tp + c.tn) / 30.0);
    CHECK(r.f1 == (c.tp == 0 ? 0.0 : 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn)));
    const auto rep_ = make_report({}, l, s, 0.4);
    CHECK(rep_.f1 == r.f1);
    CHECK(rep_.accuracy == r.accuracy);
    CHECK(rep_.confusion == c);
  }
}

TEST_CASE("stratified folds partition and balance") {
  std::vector<Label> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = i < 30 ? Label::sick : Label::not_sick;
  const auto folds = stratified_folds(y, 10, 42);
  REQUIRE(folds.size() == 100);
  std::vector<int> pos(10, 0), all(10, 0);
  for (std::size_t i = 0; i < 100; ++i) {
    REQUIRE(folds[i] < 10);
    ++all[folds[i]];
    pos[folds[i]] += is_sick(y[i]);
  }
  for (int f = 0; f < 10; ++f) {
    CHECK(std::abs(pos[f] - 3) <= 1);
    CHECK(std::abs(all[f] - 10) <= 1);
  }
  CHECK(stratified_folds(y, 10, 42) == folds);
  CHECK(stratified_folds(y, 10, 43) != folds);
  CHECK_THROWS_AS(stratified_folds(y, 1, 1), ConfigError);
  CHECK_THROWS_AS(stratified_folds(y, 101, 1), ConfigError);
}

TEST_CASE("k-fold with k = n equals leave-one-out") {
  const auto data = noisy_dataset(5, 24, 0.5);
  const auto a = k_fold_cv(data, data.size(), nb(), 9);
  const auto b = loocv(data, nb());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("held-out predictions never see their own row") {
  const auto data = noisy_dataset(6, 40, 0.5);
  const auto folds = stratified_folds(data.labels(), 5, 1);
  const auto scores = cross_validate(folds, 5, [&](std::span<const std::size_t> train, std::span<const std::size_t> test) {
    std::set<std::size_t> tr(train.begin(), train.end());
    std::vector<double> out;
    for (auto t : test) {
      CHECK_FALSE(tr.count(t));
      out.push_back(static_cast<double>(t) / 100.0);
    }
    CHECK(train.size() + test.size() == 40);
    return out;
  });
  for (std::size_t i = 0; i < 40; ++i) CHECK(scores[i] == static_cast<double>(i) / 100.0);
}

TEST_CASE("cross validation is reproducible and matches the serial kernel") {
  const auto data = noisy_dataset(7, 60, 0.3);
  const auto a = k_fold_cv(data, 10, nb(), 11);
  CHECK(a == k_fold_cv(data, 10, nb(), 11));
  CHECK(a == serial::k_fold_cv(data, 10, nb(), 11));
  const auto r = repeated_cv_auc_distribution(data, nb(), 100, 5, 3);
  CHECK(r.size() == 100);
  CHECK(r == serial::repeated_cv_auc_distribution(data, nb(), 100, 5, 3));
}

TEST_CASE("identical fold seeds give zero variance") {
  const auto data = noisy_dataset(8, 50, 0.4);
  std::vector<double> aucs;
  for (int i = 0; i < 5; ++i) aucs.push_back(auc(k_fold_cv(data, 5, nb(), 77), data.labels()));
  for (double v : aucs) CHECK(v == aucs.front());
}

TEST_CASE("anova flags a constructed factor") {
  // Same learner on informative features and on pure noise; the split factor is irrelevant.
  const auto informative = noisy_dataset(9, 80, 0.5);
  Rng rng(10);
  Dataset noise("noise", 2);
  for (std::size_t i = 0; i < informative.size(); ++i) {
    const double x[2] = {rng.normal(), rng.normal()};
    noise.add(x, informative.label(i), informative.id(i));
  }
  std::vector<double> y;
  std::vector<std::string> source, half;
  for (const Dataset* d : std::vector<const Dataset*>{&informative, &noise}) {
    const auto samples = repeated_cv_auc_distribution(*d, nb(), 20, 5, 4);
    for (std::size_t r = 0; r < samples.size(); ++r) {
      y.push_back(samples[r]);
      source.push_back(d == &informative ? "informative" : "noise");
      half.push_back(r < 10 ? "first" : "second");
    }
  }
  const std::vector<stats::Factor> f{{"Source", source}, {"Half", half}};
  const auto t = stats::anova(y, f);
  CHECK(t.rows[0].p_value < 0.01);
}

}  // TEST_SUITE
