#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "fluscope/parallel.hpp"
#include "fluscope/rng.hpp"
#include "learners_impl.hpp"

namespace fluscope::learners {

namespace {

constexpr double kGainEps = 1e-12;

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1, right = -1;
  double p = 0.5;
  std::uint32_t n = 0, n_sick = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].p;
  }

  json to_json() const {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, p;
    for (const auto& nd : nodes) {
      feature.push_back(nd.feature);
      left.push_back(nd.left);
      right.push_back(nd.right);
      threshold.push_back(nd.threshold);
      p.push_back(nd.p);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"p", p}};
  }

  static Tree from_json(const json& s) {
    const auto feature = s.at("feature").get<std::vector<int>>();
    const auto threshold = s.at("threshold").get<std::vector<double>>();
    const auto left = s.at("left").get<std::vector<int>>();
    const auto right = s.at("right").get<std::vector<int>>();
    const auto p = s.at("p").get<std::vector<double>>();
    const auto n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || p.size() != n)
      throw DataError("tree state is inconsistent");
    Tree t;
    for (std::size_t i = 0; i < n; ++i) {
      if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                              left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n)))
        throw DataError("tree state has an invalid child index");
      t.nodes.push_back({feature[i], threshold[i], left[i], right[i], p[i], 0, 0});
    }
    return t;
  }
};

double entropy(double pos, double n) {
  if (n <= 0 || pos <= 0 || pos >= n) return 0.0;
  const double p = pos / n, q = 1.0 - p;
  return -(p * std::log2(p) + q * std::log2(q));
}

struct TreeParams {
  bool gain_ratio = true;
  std::size_t min_leaf = 2;
  bool laplace = true;
  std::size_t mtry = 0;  // 0: every feature
  std::size_t max_depth = 0;
};

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double ratio = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, TreeParams params, Rng* rng) : data_(data), params_(params), rng_(rng) {
    const std::size_t d = data.n_features();
    binary_.assign(d, 1);
    for (std::size_t i = 0; i < data.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double v = data.at(i, j);
        if (v != 0.0 && v != 1.0) binary_[j] = 0;
      }
  }

  Tree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::uint32_t ns = 0;
    for (const auto r : rows) ns += is_sick(data_.label(r)) ? 1 : 0;
    const auto n = static_cast<std::uint32_t>(rows.size());
    {
      auto& node = tree_.nodes[id];
      node.n = n;
      node.n_sick = ns;
      node.p = params_.laplace ? (ns + 1.0) / (n + 2.0) : static_cast<double>(ns) / n;
    }
    if (ns == 0 || ns == n || rows.size() < 2 * params_.min_leaf) return id;
    if (params_.max_depth > 0 && depth >= params_.max_depth) return id;

    const auto best = choose_split(rows, ns);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (const auto r : rows) (data_.at(r, best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int rr = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  Candidate choose_split(const std::vector<std::size_t>& rows, std::uint32_t ns) {
    const std::size_t d = data_.n_features();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    const bool sampled = params_.mtry > 0 && params_.mtry < d;
    if (sampled) rng_->shuffle(order.begin(), order.end());

    std::vector<Candidate> found;
    bool positive = false;
    for (std::size_t k = 0; k < d; ++k) {
      if (sampled && k >= params_.mtry && positive) break;
      auto c = best_threshold(rows, ns, static_cast<int>(order[k]));
      if (c.feature < 0) continue;
      positive = positive || c.gain > kGainEps;
      found.push_back(c);
    }
    if (found.empty()) return {};

    if (!params_.gain_ratio) {
      Candidate best = found.front();
      for (const auto& c : found)
        if (c.gain > best.gain + kGainEps) best = c;
      return best;
    }
    double avg = 0;
    for (const auto& c : found) avg += c.gain;
    avg /= static_cast<double>(found.size());
    const Candidate* best = nullptr;
    for (const auto& c : found) {
      if (c.gain < avg - kGainEps) continue;
      if (!best || c.ratio > best->ratio + kGainEps) best = &c;
    }
    return *best;
  }

  Candidate best_threshold(const std::vector<std::size_t>& rows, std::uint32_t ns, int j) {
    const double n = static_cast<double>(rows.size());
    const double parent = entropy(ns, n);
    const double min_leaf = static_cast<double>(params_.min_leaf);
    Candidate best;
    auto consider = [&](double nl, double sl, double threshold) {
      const double nr = n - nl, sr = ns - sl;
      if (nl < min_leaf || nr < min_leaf) return;
      const double gain = std::max(0.0, parent - (nl / n) * entropy(sl, nl) - (nr / n) * entropy(sr, nr));
      if (best.feature >= 0 && gain <= best.gain + kGainEps) return;
      const double split_info = entropy(nl, n);
      best = {j, threshold, gain, split_info > 0 ? gain / split_info : 0.0};
    };

    if (binary_[j]) {
      double n0 = 0, s0 = 0;
      for (const auto r : rows)
        if (data_.at(r, j) == 0.0) {
          n0 += 1;
          s0 += is_sick(data_.label(r)) ? 1 : 0;
        }
      if (n0 > 0 && n0 < n) consider(n0, s0, 0.5);
      return best;
    }

    pairs_.clear();
    for (const auto r : rows) pairs_.emplace_back(data_.at(r, j), is_sick(data_.label(r)) ? 1 : 0);
    // Values are often mostly zero: sort only the negative and positive parts.
    const auto neg_end = std::partition(pairs_.begin(), pairs_.end(), [](const auto& p) { return p.first < 0.0; });
    const auto zero_end = std::partition(neg_end, pairs_.end(), [](const auto& p) { return p.first == 0.0; });
    std::sort(pairs_.begin(), neg_end);
    std::sort(zero_end, pairs_.end());

    double nl = 0, sl = 0;
    for (std::size_t i = 0; i + 1 < pairs_.size(); ++i) {
      nl += 1;
      sl += pairs_[i].second;
      const double a = pairs_[i].first, b = pairs_[i + 1].first;
      if (a == b) continue;
      double mid = a + (b - a) / 2;
      if (!(mid < b)) mid = a;
      consider(nl, sl, mid);
    }
    return best;
  }

  const Dataset& data_;
  TreeParams params_;
  Rng* rng_;
  std::vector<std::uint8_t> binary_;
  std::vector<std::pair<double, std::uint8_t>> pairs_;
  Tree tree_;
};

// Upper confidence bound on the error rate of a leaf with e errors out of n.
double pessimistic_rate(double e, double n, double z) {
  if (n <= 0) return 0.0;
  const double f = e / n, z2 = z * z;
  return (f + z2 / (2 * n) + z * std::sqrt(std::max(0.0, f / n - f * f / n + z2 / (4 * n * n)))) / (1 + z2 / n);
}

double prune(Tree& t, int i, double z) {
  auto& node = t.nodes[i];
  const double n = node.n;
  const double leaf_errors = std::min<double>(node.n_sick, node.n - node.n_sick);
  const double as_leaf = n * pessimistic_rate(leaf_errors, n, z);
  if (node.feature < 0) return as_leaf;
  const double subtree = prune(t, node.left, z) + prune(t, node.right, z);
  if (as_leaf <= subtree + 0.1) {
    t.nodes[i].feature = -1;
    t.nodes[i].left = t.nodes[i].right = -1;
    return as_leaf;
  }
  return subtree;
}

Tree compact(const Tree& t) {
  Tree out;
  auto copy = [&](auto&& self, int i) -> int {
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(t.nodes[i]);
    if (t.nodes[i].feature >= 0) {
      const int l = self(self, t.nodes[i].left);
      const int r = self(self, t.nodes[i].right);
      out.nodes[id].left = l;
      out.nodes[id].right = r;
    }
    return id;
  };
  copy(copy, 0);
  return out;
}

class DecisionTreeModel final : public ModelImpl {
 public:
  Tree tree;
  double p_sick(std::span<const double> x) const override { return tree.predict(x); }
  json state() const override { return {{"tree", tree.to_json()}}; }
};

class RandomForestModel final : public ModelImpl {
 public:
  std::vector<Tree> trees;
  double p_sick(std::span<const double> x) const override {
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
  json state() const override {
    json ts = json::array();
    for (const auto& t : trees) ts.push_back(t.to_json());
    return {{"trees", ts}};
  }
};

}  // namespace

ImplPtr train_decision_tree(const AlgorithmSpec& spec, const Dataset& data) {
  TreeParams params;
  params.gain_ratio = true;
  params.min_leaf = static_cast<std::size_t>(spec.get_int("min_leaf", 2));
  params.laplace = true;
  params.max_depth = static_cast<std::size_t>(spec.get_int("max_depth", 0));
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  TreeBuilder builder(data, params, nullptr);
  auto model = std::make_shared<DecisionTreeModel>();
  model->tree = builder.build(std::move(rows));
  if (spec.get_bool("prune", false)) {
    const double cf = spec.get_double("confidence", 0.25);
    const double z = boost::math::quantile(boost::math::complement(boost::math::normal(), cf));
    prune(model->tree, 0, z);
    model->tree = compact(model->tree);
  }
  return model;
}

ImplPtr restore_decision_tree(const json& s) {
  auto model = std::make_shared<DecisionTreeModel>();
  model->tree = Tree::from_json(s.at("tree"));
  return model;
}

ImplPtr train_random_forest(const AlgorithmSpec& spec, const Dataset& data) {
  const auto n_trees = static_cast<std::size_t>(spec.get_int("n_trees", 100));
  const std::size_t d = data.n_features();
  auto mtry = static_cast<std::size_t>(spec.get_int("mtry", 0));
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  TreeParams params;
  params.gain_ratio = false;
  params.min_leaf = static_cast<std::size_t>(spec.get_int("min_leaf", 1));
  params.laplace = false;
  params.mtry = std::min(mtry, d);
  params.max_depth = static_cast<std::size_t>(spec.get_int("max_depth", 0));

  auto model = std::make_shared<RandomForestModel>();
  model->trees.resize(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(spec.rng_seed, "random_forest", "tree", t));
    std::vector<std::size_t> rows(data.size());
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(data.size()));
    TreeBuilder builder(data, params, &rng);
    model->trees[t] = builder.build(std::move(rows));
  });
  return model;
}

ImplPtr restore_random_forest(const json& s) {
  auto model = std::make_shared<RandomForestModel>();
  for (const auto& t : s.at("trees")) model->trees.push_back(Tree::from_json(t));
  if (model->trees.empty()) throw DataError("random forest state has no trees");
  return model;
}

}  // namespace fluscope::learners
