#include "fluscope/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "fluscope/eval.hpp"
#include "learners_impl.hpp"

namespace fluscope::learners {

namespace {

struct KindName {
  Kind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {Kind::naive_bayes, "naive_bayes"},       {Kind::logistic_regression, "logistic_regression"},
    {Kind::decision_tree, "decision_tree"},   {Kind::random_forest, "random_forest"},
    {Kind::linear_svm, "linear_svm"},         {Kind::adaboost, "adaboost"},
    {Kind::logitboost, "logitboost"},         {Kind::weighted_vote, "weighted_vote"},
};

enum class ParamType { boolean, integer, real, vector };

struct ParamRule {
  std::string_view key;
  ParamType type;
  double lo;
  double hi;
  bool lo_open;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ParamRule> rules_for(Kind k) {
  switch (k) {
    case Kind::naive_bayes:
      return {{"alpha", ParamType::real, 0, kInf, true}, {"var_smoothing", ParamType::real, 0, kInf, false}};
    case Kind::logistic_regression:
      return {{"lambda", ParamType::real, 0, kInf, false},
              {"max_iter", ParamType::integer, 1, kInf, false},
              {"tol", ParamType::real, 0, kInf, true},
              {"scale", ParamType::boolean, 0, 0, false}};
    case Kind::decision_tree:
      return {{"min_leaf", ParamType::integer, 1, kInf, false},
              {"prune", ParamType::boolean, 0, 0, false},
              {"confidence", ParamType::real, 0, 0.5, true},
              {"max_depth", ParamType::integer, 0, kInf, false}};
    case Kind::random_forest:
      return {{"n_trees", ParamType::integer, 1, kInf, false},
              {"mtry", ParamType::integer, 0, kInf, false},
              {"min_leaf", ParamType::integer, 1, kInf, false},
              {"max_depth", ParamType::integer, 0, kInf, false}};
    case Kind::linear_svm:
      return {{"lambda", ParamType::real, 0, kInf, true},
              {"epochs", ParamType::integer, 1, kInf, false},
              {"patience", ParamType::integer, 1, kInf, false},
              {"scale", ParamType::boolean, 0, 0, false}};
    case Kind::adaboost:
      return {{"rounds", ParamType::integer, 1, kInf, false}};
    case Kind::logitboost:
      return {{"rounds", ParamType::integer, 1, kInf, false},
              {"clamp", ParamType::real, 0, kInf, true},
              {"shrinkage", ParamType::real, 0, 1, true}};
    case Kind::weighted_vote:
      return {{"weights", ParamType::vector, 0, kInf, false}};
  }
  return {};
}

double prior_constant(const AlgorithmSpec& spec, const Dataset& data) {
  const bool sick = data.count(Label::sick) > 0;
  if (spec.kind != Kind::naive_bayes) return sick ? 1.0 : 0.0;
  const double alpha = spec.get_double("alpha", 1.0);
  const double n = static_cast<double>(data.size());
  return sick ? (n + alpha) / (n + 2 * alpha) : alpha / (n + 2 * alpha);
}

// ---------------------------------------------------------------- naive Bayes

class NaiveBayesModel final : public ModelImpl {
 public:
  enum class FeatureKind { skip, bernoulli, gaussian };
  struct Feature {
    FeatureKind kind = FeatureKind::skip;
    double a_sick = 0, a_not = 0;  // P(x=1|class) or mean
    double b_sick = 0, b_not = 0;  // variance (gaussian only)
  };

  double prior_sick = 0.5, prior_not = 0.5;
  std::vector<Feature> features;

  // Bernoulli factors multiply as plain numbers with the binary exponent split
  // off, so posteriors such as 0.75 come out exact; Gaussian terms add in logs.
  double p_sick(std::span<const double> x) const override {
    double ms = prior_sick, mn = prior_not, gs = 0, gn = 0;
    int es = 0, en = 0;
    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto& f = features[j];
      switch (f.kind) {
        case FeatureKind::skip:
          break;
        case FeatureKind::bernoulli: {
          int e = 0;
          ms = std::frexp(ms * (x[j] != 0.0 ? f.a_sick : 1.0 - f.a_sick), &e);
          es += e;
          mn = std::frexp(mn * (x[j] != 0.0 ? f.a_not : 1.0 - f.a_not), &e);
          en += e;
          break;
        }
        case FeatureKind::gaussian: {
          const double ds = x[j] - f.a_sick, dn = x[j] - f.a_not;
          gs += -0.5 * std::log(f.b_sick) - ds * ds / (2 * f.b_sick);
          gn += -0.5 * std::log(f.b_not) - dn * dn / (2 * f.b_not);
          break;
        }
      }
    }
    const double ls = std::log(ms) + es * std::numbers::ln2 + gs, ln = std::log(mn) + en * std::numbers::ln2 + gn;
    if (gs == 0 && gn == 0 && std::abs(es - en) < 900) {
      const int top = std::max(es, en);
      const double s = std::ldexp(ms, es - top), n = std::ldexp(mn, en - top);
      return clamp_probability(s / (s + n));
    }
    return clamp_probability(logistic(ls - ln));
  }

  json state() const override {
    json fs = json::array();
    for (const auto& f : features) {
      const char* k = f.kind == FeatureKind::skip ? "skip" : f.kind == FeatureKind::bernoulli ? "bernoulli" : "gaussian";
      fs.push_back({{"kind", k}, {"a_sick", f.a_sick}, {"a_not", f.a_not}, {"b_sick", f.b_sick}, {"b_not", f.b_not}});
    }
    return {{"prior_sick", prior_sick}, {"prior_not", prior_not}, {"features", fs}};
  }
};

// -------------------------------------------------------------- weighted vote

class WeightedVoteModel final : public ModelImpl {
 public:
  // A column whose training values leave [0, 1] is not a probability; it votes
  // with the sick fraction on its side of a one-split cut instead.
  struct Split {
    double threshold = 0.0;
    double left = 0.5;   // x <= threshold
    double right = 0.5;
  };

  std::vector<double> weights;
  std::vector<int> orientation;  // +1 direct, -1 inverted, 0 neutral
  std::vector<std::optional<Split>> splits;
  double prior = 0.5;            // vote of a neutral column

  double vote(std::size_t j, double x) const {
    if (orientation[j] == 0) return prior;
    if (j < splits.size() && splits[j]) return x <= splits[j]->threshold ? splits[j]->left : splits[j]->right;
    const double v = std::clamp(x, 0.0, 1.0);
    return orientation[j] > 0 ? v : 1.0 - v;
  }

  double p_sick(std::span<const double> x) const override {
    double num = 0, den = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      num += weights[j] * vote(j, x[j]);
      den += weights[j];
    }
    return den > 0 ? clamp_probability(num / den) : 0.5;
  }

  json state() const override {
    json sp = json::array();
    for (const auto& s : splits)
      sp.push_back(s ? json{s->threshold, s->left, s->right} : json(nullptr));
    return {{"weights", weights}, {"orientation", orientation}, {"splits", sp}, {"prior", prior}};
  }
};

// Misclassification-minimizing cut of one column, majority leaves, ties to the
// lowest threshold. Leaves hold the sick fraction of each side.
WeightedVoteModel::Split column_split(std::span<const double> column, std::span<const Label> labels) {
  std::vector<std::size_t> order(column.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  const double n = static_cast<double>(column.size());
  double total_sick = 0;
  for (auto l : labels) total_sick += is_sick(l);
  WeightedVoteModel::Split best{column[order.back()], total_sick / n, total_sick / n};
  double best_err = std::min(total_sick, n - total_sick);
  double left_n = 0, left_sick = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    left_n += 1;
    left_sick += is_sick(labels[order[k]]);
    const double a = column[order[k]], b = column[order[k + 1]];
    if (a == b) continue;
    const double right_n = n - left_n, right_sick = total_sick - left_sick;
    const double err = std::min(left_sick, left_n - left_sick) + std::min(right_sick, right_n - right_sick);
    if (err < best_err) {
      best_err = err;
      best = {a + (b - a) / 2, left_sick / left_n, right_sick / right_n};
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Kind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "unknown";
}

Kind parse_kind(std::string_view s) {
  for (const auto& kn : kKindNames)
    if (kn.name == s) return kn.kind;
  if (s == "j48" || s == "J48") return Kind::decision_tree;
  if (s == "bayes" || s == "nb") return Kind::naive_bayes;
  if (s == "svm") return Kind::linear_svm;
  if (s == "forest" || s == "rf") return Kind::random_forest;
  if (s == "vote") return Kind::weighted_vote;
  if (s == "logistic" || s == "lr") return Kind::logistic_regression;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kinds = [] {
    std::vector<Kind> v;
    for (const auto& kn : kKindNames) v.push_back(kn.kind);
    return v;
  }();
  return kinds;
}

double AlgorithmSpec::get_double(const std::string& key, double fallback) const {
  const auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw ConfigError("hyperparameter '" + key + "' must be a number");
}

std::int64_t AlgorithmSpec::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  throw ConfigError("hyperparameter '" + key + "' must be an integer");
}

bool AlgorithmSpec::get_bool(const std::string& key, bool fallback) const {
  const auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) return fallback;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("hyperparameter '" + key + "' must be a boolean");
}

std::vector<double> AlgorithmSpec::get_vector(const std::string& key) const {
  const auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) return {};
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  throw ConfigError("hyperparameter '" + key + "' must be a list of numbers");
}

void validate(const AlgorithmSpec& spec) {
  const auto rules = rules_for(spec.kind);
  for (const auto& [key, value] : spec.hyperparameters) {
    const auto rule = std::find_if(rules.begin(), rules.end(), [&](const ParamRule& r) { return r.key == key; });
    if (rule == rules.end())
      throw ConfigError("unknown hyperparameter '" + key + "' for " + std::string(to_string(spec.kind)));
    auto check_range = [&](double v) {
      const bool low_ok = rule->lo_open ? v > rule->lo : v >= rule->lo;
      if (!std::isfinite(v) || !low_ok || v > rule->hi)
        throw ConfigError("hyperparameter '" + key + "' out of range for " + std::string(to_string(spec.kind)));
    };
    switch (rule->type) {
      case ParamType::boolean:
        spec.get_bool(key, false);
        break;
      case ParamType::integer:
        check_range(static_cast<double>(spec.get_int(key, 0)));
        break;
      case ParamType::real:
        check_range(spec.get_double(key, 0.0));
        break;
      case ParamType::vector: {
        const auto v = spec.get_vector(key);
        double sum = 0;
        for (const double w : v) {
          check_range(w);
          sum += w;
        }
        if (!v.empty() && sum <= 0) throw ConfigError("hyperparameter '" + key + "' must not be all zero");
        break;
      }
    }
  }
}

Model::Model(AlgorithmSpec spec, std::string schema_id, std::size_t n_features, std::shared_ptr<const ModelImpl> impl)
    : spec_(std::move(spec)), schema_id_(std::move(schema_id)), n_features_(n_features), impl_(std::move(impl)) {}

ClassDistribution Model::predict(const FeatureVector& fv) const {
  if (fv.schema_id != schema_id_)
    throw DataError("feature schema '" + fv.schema_id + "' does not match model schema '" + schema_id_ + "'");
  return {predict_row(fv.values)};
}

double Model::predict_row(std::span<const double> row) const {
  if (!impl_) throw ConfigError("predict on an untrained model");
  if (row.size() != n_features_)
    throw DataError("feature vector of width " + std::to_string(row.size()) + " given to a model of width " +
                    std::to_string(n_features_));
  return clamp_probability(impl_->p_sick(row));
}

Model train(const AlgorithmSpec& spec, const Dataset& data) {
  validate(spec);
  if (data.empty()) throw ConfigError("cannot train " + std::string(to_string(spec.kind)) + " on an empty dataset");
  if (spec.kind == Kind::weighted_vote) {
    const auto w = spec.get_vector("weights");
    if (!w.empty() && w.size() != data.n_features())
      throw ConfigError("weighted_vote has " + std::to_string(w.size()) + " weights for " +
                        std::to_string(data.n_features()) + " features");
  }
  ImplPtr impl;
  const std::size_t n_sick = data.count(Label::sick);
  if (n_sick == 0 || n_sick == data.size()) {
    impl = std::make_shared<ConstantModel>(prior_constant(spec, data));
  } else {
    switch (spec.kind) {
      case Kind::naive_bayes: impl = train_naive_bayes(spec, data); break;
      case Kind::logistic_regression: impl = train_logistic_regression(spec, data); break;
      case Kind::decision_tree: impl = train_decision_tree(spec, data); break;
      case Kind::random_forest: impl = train_random_forest(spec, data); break;
      case Kind::linear_svm: impl = train_linear_svm(spec, data); break;
      case Kind::adaboost: impl = train_adaboost(spec, data); break;
      case Kind::logitboost: impl = train_logitboost(spec, data); break;
      case Kind::weighted_vote: impl = train_weighted_vote(spec, data); break;
    }
  }
  return Model(spec, data.schema_id(), data.n_features(), std::move(impl));
}

ClassDistribution weighted_vote(std::span<const ClassDistribution> predictions, std::span<const double> weights) {
  if (predictions.empty() || predictions.size() != weights.size())
    throw ConfigError("weighted vote needs one weight per prediction and at least one voter");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!(weights[i] >= 0) || !std::isfinite(weights[i])) throw ConfigError("weighted vote weights must be non-negative");
    num += weights[i] * predictions[i].p_sick;
    den += weights[i];
  }
  if (den <= 0) throw ConfigError("weighted vote weights are all zero");
  return {clamp_probability(num / den)};
}

ImplPtr train_naive_bayes(const AlgorithmSpec& spec, const Dataset& data) {
  const double alpha = spec.get_double("alpha", 1.0);
  const double smoothing = spec.get_double("var_smoothing", 1e-9);
  const std::size_t n = data.size(), d = data.n_features();
  const double ns = static_cast<double>(data.count(Label::sick));
  const double nn = static_cast<double>(n) - ns;

  auto model = std::make_shared<NaiveBayesModel>();
  model->prior_sick = (ns + alpha) / (static_cast<double>(n) + 2 * alpha);
  model->prior_not = (nn + alpha) / (static_cast<double>(n) + 2 * alpha);
  model->features.resize(d);

  double max_var = 0;
  std::vector<bool> binary(d, true), constant(d, true);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.at(i, j);
      if (v != 0.0 && v != 1.0) binary[j] = false;
      if (v != data.at(0, j)) constant[j] = false;
      mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (data.at(i, j) - mean) * (data.at(i, j) - mean);
    max_var = std::max(max_var, var / static_cast<double>(n));
  }
  const double floor = std::max(smoothing * max_var, 1e-300);

  for (std::size_t j = 0; j < d; ++j) {
    auto& f = model->features[j];
    if (constant[j]) continue;
    double s1 = 0, s0 = 0, m1 = 0, m0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.at(i, j);
      if (is_sick(data.label(i))) {
        s1 += v;
      } else {
        s0 += v;
      }
    }
    if (binary[j]) {
      f.kind = NaiveBayesModel::FeatureKind::bernoulli;
      f.a_sick = (s1 + alpha) / (ns + 2 * alpha);
      f.a_not = (s0 + alpha) / (nn + 2 * alpha);
      continue;
    }
    f.kind = NaiveBayesModel::FeatureKind::gaussian;
    f.a_sick = s1 / ns;
    f.a_not = s0 / nn;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = data.at(i, j);
      if (is_sick(data.label(i))) {
        m1 += (v - f.a_sick) * (v - f.a_sick);
      } else {
        m0 += (v - f.a_not) * (v - f.a_not);
      }
    }
    f.b_sick = m1 / ns + floor;
    f.b_not = m0 / nn + floor;
  }
  return model;
}

ImplPtr restore_naive_bayes(const json& s) {
  auto model = std::make_shared<NaiveBayesModel>();
  model->prior_sick = s.at("prior_sick").get<double>();
  model->prior_not = s.at("prior_not").get<double>();
  for (const auto& f : s.at("features")) {
    NaiveBayesModel::Feature out;
    const auto kind = f.at("kind").get<std::string>();
    if (kind == "skip") {
      out.kind = NaiveBayesModel::FeatureKind::skip;
    } else if (kind == "bernoulli") {
      out.kind = NaiveBayesModel::FeatureKind::bernoulli;
    } else if (kind == "gaussian") {
      out.kind = NaiveBayesModel::FeatureKind::gaussian;
    } else {
      throw DataError("unknown naive Bayes feature kind '" + kind + "'");
    }
    out.a_sick = f.at("a_sick").get<double>();
    out.a_not = f.at("a_not").get<double>();
    out.b_sick = f.at("b_sick").get<double>();
    out.b_not = f.at("b_not").get<double>();
    model->features.push_back(out);
  }
  return model;
}

ImplPtr train_weighted_vote(const AlgorithmSpec& spec, const Dataset& data) {
  auto model = std::make_shared<WeightedVoteModel>();
  const std::size_t d = data.n_features();
  const auto given = spec.get_vector("weights");
  model->prior = static_cast<double>(data.count(Label::sick)) / static_cast<double>(data.size());
  if (!given.empty()) {
    model->weights = given;
    model->orientation.assign(d, 1);
    return model;
  }
  // Each column votes with its training AUC after orienting it so that the AUC is at least 1/2.
  // A column without signal votes the class prior.
  std::vector<double> column(data.size());
  for (std::size_t j = 0; j < d; ++j) {
    bool probability = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      column[i] = data.at(i, j);
      probability = probability && column[i] >= 0.0 && column[i] <= 1.0;
    }
    const double a = eval::auc(column, data.labels());
    model->weights.push_back(std::max(a, 1.0 - a));
    model->orientation.push_back(a > 0.5 ? 1 : a < 0.5 ? -1 : 0);
    model->splits.push_back(probability ? std::nullopt : std::optional(column_split(column, data.labels())));
  }
  return model;
}

ImplPtr restore_weighted_vote(const json& s) {
  auto model = std::make_shared<WeightedVoteModel>();
  model->weights = s.at("weights").get<std::vector<double>>();
  model->orientation = s.at("orientation").get<std::vector<int>>();
  model->prior = s.at("prior").get<double>();
  for (const auto& sp : s.at("splits")) {
    if (sp.is_null()) {
      model->splits.emplace_back();
    } else {
      model->splits.push_back(WeightedVoteModel::Split{sp.at(0).get<double>(), sp.at(1).get<double>(), sp.at(2).get<double>()});
    }
  }
  if (model->weights.size() != model->orientation.size() ||
      (!model->splits.empty() && model->splits.size() != model->weights.size()))
    throw DataError("weighted vote state is inconsistent");
  return model;
}

}  // namespace fluscope::learners
