#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fluscope/dataset.hpp"

namespace fluscope::learners {

enum class Kind {
  naive_bayes,
  logistic_regression,
  decision_tree,
  random_forest,
  linear_svm,
  adaboost,
  logitboost,
  weighted_vote,
};

std::string_view to_string(Kind k);
/// Accepts the enum names plus "j48", "bayes", "svm", "forest", "vote". Throws ConfigError.
Kind parse_kind(std::string_view s);
const std::vector<Kind>& all_kinds();

using HyperValue = std::variant<bool, std::int64_t, double, std::vector<double>>;

/// Algorithm plus hyperparameters. Unset keys take the documented defaults:
///   naive_bayes          alpha=1, var_smoothing=1e-9
///   logistic_regression  lambda=1e-4, max_iter=10000, tol=1e-6, scale=true
///   decision_tree        min_leaf=2, prune=false, confidence=0.25, max_depth=0 (unbounded)
///   random_forest        n_trees=100, mtry=0 (ceil(sqrt(d))), min_leaf=1, max_depth=0
///   linear_svm           lambda=1e-3, epochs=10000, patience=200, scale=true
///   adaboost             rounds=50
///   logitboost           rounds=50, clamp=4, shrinkage=0.5
///   weighted_vote        weights=[] (training AUC of each column)
struct AlgorithmSpec {
  Kind kind = Kind::naive_bayes;
  std::map<std::string, HyperValue> hyperparameters;
  std::uint64_t rng_seed = 0;

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_vector(const std::string& key) const;

  AlgorithmSpec& set(const std::string& key, HyperValue v) {
    hyperparameters[key] = std::move(v);
    return *this;
  }
};

/// Throws ConfigError for unknown keys, wrong types or out-of-range values.
void validate(const AlgorithmSpec& spec);

struct ClassDistribution {
  double p_sick = 0.5;
};

class ModelImpl;

/// Fitted, immutable model. Copies share state.
class Model {
 public:
  Model() = default;
  Model(AlgorithmSpec spec, std::string schema_id, std::size_t n_features, std::shared_ptr<const ModelImpl> impl);

  const AlgorithmSpec& spec() const { return spec_; }
  Kind kind() const { return spec_.kind; }
  const std::string& schema_id() const { return schema_id_; }
  std::size_t n_features() const { return n_features_; }
  const ModelImpl& impl() const { return *impl_; }

  /// Throws DataError when the vector's schema or width differs from training.
  ClassDistribution predict(const FeatureVector& fv) const;
  /// Width-checked prediction on a raw row of the training schema.
  double predict_row(std::span<const double> row) const;

 private:
  AlgorithmSpec spec_;
  std::string schema_id_;
  std::size_t n_features_ = 0;
  std::shared_ptr<const ModelImpl> impl_;
};

/// Deterministic in (spec, data). Single-class data yields a constant model.
/// Throws ConfigError for an empty dataset or invalid hyperparameters.
Model train(const AlgorithmSpec& spec, const Dataset& data);

/// p = sum(w_i p_i) / sum(w_i). Throws ConfigError on mismatched sizes,
/// negative weights or an all-zero weight vector.
ClassDistribution weighted_vote(std::span<const ClassDistribution> predictions, std::span<const double> weights);

/// JSON artifact: {"format":"fluscope-model","version":1,"kind",...,"state":{...}}.
std::string model_to_json(const Model& m);
/// Throws DataError on malformed or unsupported artifacts.
Model model_from_json(std::string_view text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

namespace detail {

/// Regularized mean log-loss over `data` for parameters [w_0..w_{d-1}, b]:
/// (1/n) sum log(1 + exp(-y (w.x + b))) + lambda/2 |w|^2, y in {-1, +1}.
/// Writes the gradient when `grad` is non-null.
double logistic_objective(std::span<const double> params, const Dataset& data, double lambda,
                          std::vector<double>* grad);

/// Parameters of a logistic regression fit on unscaled features.
std::vector<double> fit_logistic(const Dataset& data, double lambda, int max_iter, double tol);

/// A one-split classifier; feature = -1 means no split (left side everywhere).
struct Stump {
  int feature = -1;
  double threshold = 0.0;
  double left = 0.0;   // prediction when x[feature] <= threshold
  double right = 0.0;  // prediction otherwise
};

/// The AdaBoost base learner: minimum weighted 0/1 error stump with leaf
/// predictions in {-1, +1}. Ties keep the first feature and the lowest threshold.
Stump best_classification_stump(const Dataset& data, std::span<const double> weights);

}  // namespace detail

}  // namespace fluscope::learners
