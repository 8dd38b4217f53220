#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fluscope/anomaly.hpp"
#include "fluscope/rng.hpp"
#include "oracles.hpp"

using namespace fluscope;
using namespace fluscope::anomaly;

namespace {

MonthlySeries series_of(std::vector<std::uint64_t> counts) {
  MonthlySeries s;
  YearMonth m{2012, 9};
  for (auto c : counts) {
    s.push_back({m, c});
    m = m.next();
  }
  return s;
}

std::vector<std::uint64_t> counts_of(const MonthlySeries& s) {
  std::vector<std::uint64_t> out;
  for (const auto& m : s) out.push_back(m.count);
  return out;
}

}  // namespace

TEST_SUITE("anomaly") {

TEST_CASE("eligible months keep ten or more tweets") {
  CHECK(counts_of(eligible_months(series_of({12, 9, 30}))) == std::vector<std::uint64_t>{12, 30});
  CHECK(counts_of(eligible_months(series_of({10}))) == std::vector<std::uint64_t>{10});
  Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::uint64_t> c(1 + rng.below(12));
    for (auto& v : c) v = rng.below(25);
    std::vector<std::uint64_t> want;
    for (auto v : c)
      if (v >= 10) want.push_back(v);
    CHECK(counts_of(eligible_months(series_of(c))) == want);
  }
}

TEST_CASE("z-score examples") {
  const std::vector<double> a{8, 12, 10};
  CHECK(zscore(10.0, a).z == 0.0);
  const std::vector<double> b{20, 10, 10, 10, 10};
  const auto s = zscore(20.0, b);
  CHECK(s.mean == 12.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(20.0)).epsilon(1e-15));
  CHECK(s.z == doctest::Approx(8.0 / std::sqrt(20.0)).epsilon(1e-15));
  const std::vector<double> flat{15, 15, 15};
  CHECK(zscore(15.0, flat).z == 0.0);
  CHECK(zscore(16.0, flat).z == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(zscore(15.0, std::vector<double>{15}), InsufficientData);

  const auto series = series_of({20, 10, 10, 10, 10, 3});
  CHECK(zscore(YearMonth{2012, 9}, series).z == doctest::Approx(8.0 / std::sqrt(20.0)).epsilon(1e-15));
  CHECK_THROWS_AS(zscore(YearMonth{2013, 2}, series), ConfigError);
  // Leaving the target out: mean 10, sd 0, target differs.
  CHECK(zscore(YearMonth{2012, 9}, series, true).z == std::numeric_limits<double>::infinity());
}

TEST_CASE("z-score is invariant to scaling and shifting the counts") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> c(2 + rng.below(7));
    for (auto& v : c) v = 10.0 + static_cast<double>(rng.below(200));
    if (std::all_of(c.begin(), c.end(), [&](double v) { return v == c[0]; })) c[0] += 1;
    const double x = c[rng.below(c.size())];
    const double z = zscore(x, c).z;
    const double k = 0.1 + 10.0 * rng.uniform(), shift = 1000.0 * rng.uniform() - 500.0;
    std::vector<double> scaled = c, shifted = c;
    for (auto& v : scaled) v *= k;
    for (auto& v : shifted) v += shift;
    CHECK(std::abs(zscore(x * k, scaled).z - z) < 1e-12);
    CHECK(std::abs(zscore(x + shift, shifted).z - z) < 1e-12);
  }
}

TEST_CASE("classification and probability") {
  CHECK(classify(1.5, 1.411) == Label::sick);
  CHECK(classify(1.411, 1.411) == Label::not_sick);
  CHECK(classify(std::numeric_limits<double>::infinity(), 100.0) == Label::sick);
  CHECK(anomaly_probability(2.0, 2.0) == 0.5);
  CHECK(anomaly_probability(std::numeric_limits<double>::infinity(), 3.0) == 1.0);
  CHECK(anomaly_probability(3.0, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("threshold fit on separable and degenerate data") {
  const std::vector<Instance> sep{{0.1, Label::not_sick}, {0.2, Label::not_sick}, {2.0, Label::sick}, {3.0, Label::sick}};
  const auto fit = fit_threshold_loocv(sep);
  CHECK(fit.threshold == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(fit.f1 == 1.0);
  CHECK(fit.held_out_f1 == 1.0);

  const std::vector<Instance> same{{1.0, Label::sick}, {1.0, Label::not_sick}, {1.0, Label::not_sick}};
  const auto d = fit_threshold_loocv(same);
  CHECK(d.threshold < 1.0);
  CHECK(d.f1 == doctest::Approx(0.5));
  CHECK_THROWS_AS(fit_threshold_loocv(std::vector<Instance>{{1.0, Label::sick}}), InsufficientData);
  CHECK_THROWS_AS(fit_threshold_loocv(std::vector<Instance>{{1.0, Label::sick}, {2.0, Label::sick}}), InsufficientData);
}

TEST_CASE("threshold fit matches an exhaustive midpoint sweep") {
  Rng rng(29);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<Instance> inst(n);
    std::vector<double> z(n);
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.35) ? Label::sick : Label::not_sick;
      const double raw = std::abs(rng.normal() + (is_sick(y[i]) ? 0.8 : 0.0));
      z[i] = rep % 2 ? std::round(raw * 4) / 4 : raw;
      inst[i] = {z[i], y[i]};
    }
    y[0] = Label::sick;
    y[1] = Label::not_sick;
    inst[0].label = y[0];
    inst[1].label = y[1];

    const auto fit = fit_threshold_loocv(inst);
    const auto [t, f] = oracle::threshold_sweep(z, y);
    CHECK(fit.threshold == t);
    CHECK(fit.f1 == f);
    CHECK(best_threshold(inst).first == t);
    for (double c : candidate_thresholds(inst)) CHECK(fit.f1 >= oracle::f1_at(z, y, c));

    std::vector<Label> held(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto z_rest = z;
      auto y_rest = y;
      z_rest.erase(z_rest.begin() + static_cast<std::ptrdiff_t>(i));
      y_rest.erase(y_rest.begin() + static_cast<std::ptrdiff_t>(i));
      const double ti = oracle::threshold_sweep(z_rest, y_rest).first;
      CHECK(fit.fold_thresholds[i] == ti);
      held[i] = z[i] > ti ? Label::sick : Label::not_sick;
    }
    CHECK(fit.held_out_predictions == held);
    const auto ser = serial::fit_threshold_loocv(inst);
    CHECK(ser.fold_thresholds == fit.fold_thresholds);
    CHECK(ser.held_out_f1 == fit.held_out_f1);
  }
}

}  // TEST_SUITE
