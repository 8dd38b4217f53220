#pragma once

#include <cmath>
#include <memory>
#include <span>

#include <json.hpp>

#include "fluscope/learners.hpp"

namespace fluscope::learners {

using json = nlohmann::json;

class ModelImpl {
 public:
  virtual ~ModelImpl() = default;
  virtual double p_sick(std::span<const double> x) const = 0;
  virtual json state() const = 0;
};

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double clamp_probability(double p) {
  if (std::isnan(p)) return 0.5;
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

class ConstantModel final : public ModelImpl {
 public:
  explicit ConstantModel(double p) : p_(p) {}
  double p_sick(std::span<const double>) const override { return p_; }
  json state() const override { return {{"constant", p_}}; }

 private:
  double p_;
};

using ImplPtr = std::shared_ptr<const ModelImpl>;

// Training entry points; data always holds both classes.
ImplPtr train_naive_bayes(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_weighted_vote(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_decision_tree(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_random_forest(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_logistic_regression(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_linear_svm(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_adaboost(const AlgorithmSpec& spec, const Dataset& data);
ImplPtr train_logitboost(const AlgorithmSpec& spec, const Dataset& data);

// Inverse of ModelImpl::state(); throws json exceptions or DataError on bad input.
ImplPtr restore_naive_bayes(const json& s);
ImplPtr restore_weighted_vote(const json& s);
ImplPtr restore_decision_tree(const json& s);
ImplPtr restore_random_forest(const json& s);
ImplPtr restore_logistic_regression(const json& s);
ImplPtr restore_linear_svm(const json& s);
ImplPtr restore_adaboost(const json& s);
ImplPtr restore_logitboost(const json& s);

}  // namespace fluscope::learners
