#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "fluscope/learners.hpp"
#include "fluscope/rng.hpp"

using namespace fluscope;
using namespace fluscope::learners;

namespace {

Dataset separable_2d(std::uint64_t seed, std::size_t n = 40) {
  Rng rng(seed);
  Dataset d("xy", 2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool sick = i % 2 == 0;
    const double mag = 0.5 + 2.5 * rng.uniform();
    const double x[2] = {sick ? mag : -mag, 6.0 * rng.uniform() - 3.0};
    d.add(x, sick ? Label::sick : Label::not_sick, "r" + std::to_string(i));
  }
  return d;
}

double training_accuracy(const Model& m, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += (m.predict_row(d.row(i)) > 0.5) == is_sick(d.label(i));
  return static_cast<double>(ok) / d.size();
}

AlgorithmSpec spec_of(Kind k, std::uint64_t seed = 1) {
  AlgorithmSpec s;
  s.kind = k;
  s.rng_seed = seed;
  return s;
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d, bool binary) {
  Dataset data("rand", d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    double signal = 0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = binary ? static_cast<double>(rng.below(2)) : rng.normal();
      signal += (j % 2 ? -1.0 : 1.0) * x[j];
    }
    const bool sick = signal + rng.normal() > 0.0;
    data.add(x, sick ? Label::sick : Label::not_sick, "i" + std::to_string(i));
  }
  return data;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("every kind separates margin-separated 2-D data") {
  const auto data = separable_2d(99);
  for (const auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    const auto m = train(spec_of(kind), data);
    CHECK(training_accuracy(m, data) == 1.0);
  }
}

TEST_CASE("xor separates trees from linear models") {
  Dataset xor4("xor", 2);
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int i = 0; i < 4; ++i)
    xor4.add(pts[i], (pts[i][0] != pts[i][1]) ? Label::sick : Label::not_sick, std::to_string(i));
  auto tree = spec_of(Kind::decision_tree);
  tree.set("min_leaf", std::int64_t{1});
  auto forest = spec_of(Kind::random_forest);
  forest.set("mtry", std::int64_t{2});
  CHECK(training_accuracy(train(tree, xor4), xor4) == 1.0);
  CHECK(training_accuracy(train(forest, xor4), xor4) == 1.0);
  CHECK(training_accuracy(train(spec_of(Kind::logistic_regression), xor4), xor4) <= 0.75);
  CHECK(training_accuracy(train(spec_of(Kind::linear_svm), xor4), xor4) <= 0.75);
}

TEST_CASE("naive bayes hand posterior") {
  Dataset d("f", 1);
  const double one[1] = {1}, zero[1] = {0};
  d.add(one, Label::sick, "a");
  d.add(one, Label::sick, "b");
  d.add(zero, Label::not_sick, "c");
  d.add(zero, Label::not_sick, "d");
  const auto m = train(spec_of(Kind::naive_bayes), d);
  CHECK(m.predict_row(one) == 0.75);
  CHECK(m.predict_row(zero) == 0.25);
}

TEST_CASE("single class data gives a constant model") {
  Dataset d("f", 1);
  for (int i = 0; i < 5; ++i) {
    const double x[1] = {static_cast<double>(i)};
    d.add(x, Label::sick, std::to_string(i));
  }
  const double q[1] = {2.5};
  for (const auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    const double p = train(spec_of(kind), d).predict_row(q);
    if (kind == Kind::naive_bayes)
      CHECK(p == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    else
      CHECK(p == 1.0);
  }
}

TEST_CASE("constant features predict the class prior") {
  Dataset d("c", 2);
  const double x[2] = {1.0, 0.0};
  for (int i = 0; i < 40; ++i) d.add(x, i < 30 ? Label::sick : Label::not_sick, std::to_string(i));
  for (const auto kind : all_kinds()) {
    CAPTURE(to_string(kind));
    CHECK(train(spec_of(kind), d).predict_row(x) == doctest::Approx(0.75).epsilon(0.06 / 0.75));
  }
}

TEST_CASE("predictions are valid, deterministic and survive serialization") {
  Rng rng(5);
  for (const bool binary : {true, false}) {
    const auto data = random_dataset(rng, 60, 4, binary);
    for (const auto kind : all_kinds()) {
      CAPTURE(to_string(kind));
      const auto a = train(spec_of(kind, 3), data);
      const auto b = train(spec_of(kind, 3), data);
      const auto restored = model_from_json(model_to_json(a));
      CHECK(restored.kind() == kind);
      CHECK(restored.schema_id() == data.schema_id());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double p = a.predict_row(data.row(i));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p == b.predict_row(data.row(i)));
        CHECK(p == restored.predict_row(data.row(i)));
      }
    }
  }
}

TEST_CASE("model files and schema checks") {
  const auto data = separable_2d(4);
  const auto m = train(spec_of(Kind::random_forest), data);
  const auto path = (std::filesystem::temp_directory_path() / "fluscope_model_test.json").string();
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back.predict(data.vector(0)).p_sick == m.predict(data.vector(0)).p_sick);
  FeatureVector wrong{{1.0, 2.0}, "other"};
  CHECK_THROWS_AS(m.predict(wrong), DataError);
  FeatureVector narrow{{1.0}, "xy"};
  CHECK_THROWS_AS(m.predict(narrow), DataError);
  CHECK_THROWS_AS(model_from_json("{\"format\":\"nope\"}"), DataError);
  CHECK_THROWS_AS(model_from_json("not json"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("invalid specs and empty data are rejected") {
  const auto data = separable_2d(4);
  auto bad = spec_of(Kind::random_forest);
  bad.set("n_trees", std::int64_t{0});
  CHECK_THROWS_AS(train(bad, data), ConfigError);
  auto unknown = spec_of(Kind::naive_bayes);
  unknown.set("depth", std::int64_t{3});
  CHECK_THROWS_AS(train(unknown, data), ConfigError);
  CHECK_THROWS_AS(train(spec_of(Kind::naive_bayes), Dataset("e", 2)), ConfigError);
  CHECK(parse_kind("j48") == Kind::decision_tree);
  CHECK(parse_kind("bayes") == Kind::naive_bayes);
  CHECK_THROWS_AS(parse_kind("perceptron"), ConfigError);
}

TEST_CASE("logistic gradient matches finite differences") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_dataset(rng, 30, 3, false);
    const double lambda = 1e-2;
    std::vector<double> w(4);
    for (auto& v : w) v = rng.normal();
    std::vector<double> grad;
    detail::logistic_objective(w, data, lambda, &grad);
    const double h = 1e-6;
    double diff = 0, norm = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto up = w, down = w;
      up[j] += h;
      down[j] -= h;
      const double fd =
          (detail::logistic_objective(up, data, lambda, nullptr) - detail::logistic_objective(down, data, lambda, nullptr)) /
          (2 * h);
      diff += (fd - grad[j]) * (fd - grad[j]);
      norm += grad[j] * grad[j];
    }
    CHECK(std::sqrt(diff) / std::sqrt(norm) <= 1e-4);

    const auto fit = detail::fit_logistic(data, 1e-4, 10000, 1e-6);
    std::vector<double> g;
    detail::logistic_objective(fit, data, 1e-4, &g);
    double gn = 0;
    for (double v : g) gn += v * v;
    CHECK(std::sqrt(gn) <= 1e-5);
  }
}

TEST_CASE("label swap symmetry") {
  Rng rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto data = random_dataset(rng, 50, 3, rep % 2 == 0);
    const auto flipped_data = data.with_flipped_labels();
    for (const auto kind : {Kind::naive_bayes, Kind::logistic_regression, Kind::weighted_vote}) {
      CAPTURE(to_string(kind));
      const auto a = train(spec_of(kind), data), b = train(spec_of(kind), flipped_data);
      for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(a.predict_row(data.row(i)) == doctest::Approx(1.0 - b.predict_row(data.row(i))).epsilon(1e-9).scale(1.0));
    }
    for (const auto kind : {Kind::decision_tree, Kind::random_forest, Kind::adaboost, Kind::logitboost}) {
      CAPTURE(to_string(kind));
      const auto a = train(spec_of(kind), data), b = train(spec_of(kind), flipped_data);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double pa = a.predict_row(data.row(i)), pb = b.predict_row(data.row(i));
        if (std::abs(pa - 0.5) > 1e-9 && std::abs(pb - 0.5) > 1e-9) CHECK((pa > 0.5) != (pb > 0.5));
      }
    }
  }
}

TEST_CASE("adaboost with one round is its best stump") {
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const auto data = random_dataset(rng, 25, 3, rep % 3 == 0);
    const std::vector<double> uniform(data.size(), 1.0 / data.size());

    // Brute-force minimum weighted error over every feature, threshold and polarity.
    double best_err = 1.0;
    for (std::size_t j = 0; j < data.n_features(); ++j) {
      std::vector<double> cuts{-1e300};
      for (std::size_t i = 0; i < data.size(); ++i) cuts.push_back(data.at(i, j));
      for (double c : cuts)
        for (double pol : {1.0, -1.0}) {
          double err = 0;
          for (std::size_t i = 0; i < data.size(); ++i) {
            const double h = data.at(i, j) <= c ? -pol : pol;
            if (h != (is_sick(data.label(i)) ? 1.0 : -1.0)) err += uniform[i];
          }
          best_err = std::min(best_err, err);
        }
    }
    const auto stump = detail::best_classification_stump(data, uniform);
    double stump_err = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double h = stump.feature < 0 ? stump.left : (data.at(i, stump.feature) <= stump.threshold ? stump.left : stump.right);
      if (h != (is_sick(data.label(i)) ? 1.0 : -1.0)) stump_err += uniform[i];
    }
    CHECK(stump_err == doctest::Approx(best_err).epsilon(1e-12));

    auto one = spec_of(Kind::adaboost);
    one.set("rounds", std::int64_t{1});
    const auto m = train(one, data);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double h = stump.feature < 0 ? stump.left : (data.at(i, stump.feature) <= stump.threshold ? stump.left : stump.right);
      const double want = h > 0 ? 1.0 - stump_err : stump_err;
      CHECK(m.predict_row(data.row(i)) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("adaboost training error does not increase with rounds on separable data") {
  const auto data = separable_2d(8, 60);
  double previous = 1.0;
  for (std::int64_t rounds = 1; rounds <= 20; ++rounds) {
    auto s = spec_of(Kind::adaboost);
    s.set("rounds", rounds);
    const double err = 1.0 - training_accuracy(train(s, data), data);
    CHECK(err <= previous + 1e-12);
    previous = err;
  }
}

TEST_CASE("weighted vote combiner") {
  const std::vector<ClassDistribution> two{{0.2}, {0.8}};
  const std::vector<double> eq{1.0, 1.0};
  CHECK(weighted_vote(two, eq).p_sick == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<ClassDistribution> one{{0.3}};
  const std::vector<double> w1{2.0};
  CHECK(weighted_vote(one, w1).p_sick == doctest::Approx(0.3).epsilon(1e-15));
  const std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(weighted_vote(two, zeros), ConfigError);
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<ClassDistribution> p(n);
    std::vector<double> w(n);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < n; ++k) {
      p[k].p_sick = rng.uniform();
      w[k] = rng.uniform() + 0.01;
      num += w[k] * p[k].p_sick;
      den += w[k];
    }
    CHECK(weighted_vote(p, w).p_sick == doctest::Approx(num / den).epsilon(1e-14));
  }
}

}  // TEST_SUITE
