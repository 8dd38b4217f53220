#include <algorithm>
#include <cmath>
#include <numeric>

#include "learners_impl.hpp"

namespace fluscope::learners {

using detail::Stump;

namespace {

constexpr double kTieEps = 1e-12;

std::vector<std::vector<std::size_t>> presort(const Dataset& data) {
  std::vector<std::vector<std::size_t>> orders(data.n_features());
  for (std::size_t j = 0; j < data.n_features(); ++j) {
    auto& o = orders[j];
    o.resize(data.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return data.at(a, j) < data.at(b, j); });
  }
  return orders;
}

double split_point(double a, double b) {
  const double mid = a + (b - a) / 2;
  return mid < b ? mid : a;
}

Stump classification_stump(const Dataset& data, const std::vector<std::vector<std::size_t>>& orders,
                           std::span<const double> w) {
  double w_pos = 0, w_neg = 0;
  for (std::size_t i = 0; i < data.size(); ++i) (is_sick(data.label(i)) ? w_pos : w_neg) += w[i];

  Stump best;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < orders.size(); ++j) {
    const auto& o = orders[j];
    double lp = 0, ln = 0;
    for (std::size_t k = 0; k + 1 < o.size(); ++k) {
      (is_sick(data.label(o[k])) ? lp : ln) += w[o[k]];
      const double a = data.at(o[k], j), b = data.at(o[k + 1], j);
      if (a == b) continue;
      const double left_sick = ln + (w_pos - lp);
      const double left_not = lp + (w_neg - ln);
      if (left_sick < best_err - kTieEps) {
        best_err = left_sick;
        best = {static_cast<int>(j), split_point(a, b), 1.0, -1.0};
      }
      if (left_not < best_err - kTieEps) {
        best_err = left_not;
        best = {static_cast<int>(j), split_point(a, b), -1.0, 1.0};
      }
    }
  }
  if (w_neg < best_err - kTieEps) {
    best_err = w_neg;
    best = {-1, 0.0, 1.0, 1.0};
  }
  if (w_pos < best_err - kTieEps) best = {-1, 0.0, -1.0, -1.0};
  return best;
}

// Weighted least-squares stump on responses z; leaves hold weighted means.
Stump regression_stump(const Dataset& data, const std::vector<std::vector<std::size_t>>& orders,
                       std::span<const double> w, std::span<const double> z) {
  double sw = 0, swz = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sw += w[i];
    swz += w[i] * z[i];
  }
  Stump best{-1, 0.0, swz / sw, swz / sw};
  // A split must beat the constant stump's score swz^2 / sw.
  double best_score = swz * swz / sw;
  for (std::size_t j = 0; j < orders.size(); ++j) {
    const auto& o = orders[j];
    double lw = 0, lwz = 0;
    for (std::size_t k = 0; k + 1 < o.size(); ++k) {
      lw += w[o[k]];
      lwz += w[o[k]] * z[o[k]];
      const double a = data.at(o[k], j), b = data.at(o[k + 1], j);
      if (a == b) continue;
      const double rw = sw - lw, rwz = swz - lwz;
      if (lw <= 0 || rw <= 0) continue;
      const double score = lwz * lwz / lw + rwz * rwz / rw;
      if (score > best_score + kTieEps * std::max(1.0, std::abs(best_score))) {
        best_score = score;
        best = {static_cast<int>(j), split_point(a, b), lwz / lw, rwz / rw};
      }
    }
  }
  return best;
}

double stump_value(const Stump& s, std::span<const double> x) {
  if (s.feature < 0) return s.left;
  return x[s.feature] <= s.threshold ? s.left : s.right;
}

// p = logistic(2 F) with F the sum of stump outputs.
class BoostedStumpsModel final : public ModelImpl {
 public:
  std::vector<Stump> stumps;

  double p_sick(std::span<const double> x) const override {
    double f = 0;
    for (const auto& s : stumps) f += stump_value(s, x);
    return clamp_probability(logistic(2 * f));
  }

  json state() const override {
    json arr = json::array();
    for (const auto& s : stumps) arr.push_back({s.feature, s.threshold, s.left, s.right});
    return {{"stumps", arr}};
  }

  static ImplPtr restore(const json& s) {
    auto model = std::make_shared<BoostedStumpsModel>();
    for (const auto& e : s.at("stumps")) {
      if (!e.is_array() || e.size() != 4) throw DataError("stump state must be [feature, threshold, left, right]");
      model->stumps.push_back({e[0].get<int>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>()});
    }
    return model;
  }
};

}  // namespace

Stump detail::best_classification_stump(const Dataset& data, std::span<const double> weights) {
  if (weights.size() != data.size()) throw ConfigError("stump weights do not match the dataset");
  return classification_stump(data, presort(data), weights);
}

ImplPtr train_adaboost(const AlgorithmSpec& spec, const Dataset& data) {
  const auto rounds = spec.get_int("rounds", 50);
  const std::size_t n = data.size();
  const auto orders = presort(data);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  auto model = std::make_shared<BoostedStumpsModel>();

  for (std::int64_t t = 0; t < rounds; ++t) {
    const Stump s = classification_stump(data, orders, w);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = is_sick(data.label(i)) ? 1.0 : -1.0;
      if (stump_value(s, data.row(i)) != y) err += w[i];
    }
    if (err >= 0.5 - kTieEps) break;
    const double capped = std::max(err, 1e-10);
    const double alpha = 0.5 * std::log((1 - capped) / capped);
    model->stumps.push_back({s.feature, s.threshold, alpha * s.left, alpha * s.right});
    if (err <= 0) break;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = is_sick(data.label(i)) ? 1.0 : -1.0;
      w[i] *= std::exp(-alpha * y * stump_value(s, data.row(i)));
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }
  return model;
}

ImplPtr restore_adaboost(const json& s) { return BoostedStumpsModel::restore(s); }

ImplPtr train_logitboost(const AlgorithmSpec& spec, const Dataset& data) {
  const auto rounds = spec.get_int("rounds", 50);
  const double clamp = spec.get_double("clamp", 4.0);
  const double shrinkage = spec.get_double("shrinkage", 0.5);
  const std::size_t n = data.size();
  const auto orders = presort(data);
  std::vector<double> f(n, 0.0), w(n), z(n);
  auto model = std::make_shared<BoostedStumpsModel>();

  for (std::int64_t t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(2 * f[i]);
      const double y = is_sick(data.label(i)) ? 1.0 : 0.0;
      const double v = p * (1 - p);
      if (v < 1e-12) {
        z[i] = y > p ? clamp : -clamp;
      } else {
        z[i] = std::clamp((y - p) / v, -clamp, clamp);
      }
      w[i] = std::max(v, 1e-12);
    }
    Stump s = regression_stump(data, orders, w, z);
    s.left *= shrinkage;
    s.right *= shrinkage;
    model->stumps.push_back(s);
    for (std::size_t i = 0; i < n; ++i) f[i] += stump_value(s, data.row(i));
  }
  return model;
}

ImplPtr restore_logitboost(const json& s) { return BoostedStumpsModel::restore(s); }

}  // namespace fluscope::learners
