#include "fluscope/meta.hpp"

#include <algorithm>
#include <cmath>

namespace fluscope::meta {

namespace {
constexpr std::array<std::string_view, kSignalCount> kSignalNames = {"expert_keywords", "mined_keywords", "human",
                                                                      "anomaly", "network"};
}

std::string_view to_string(Signal s) { return kSignalNames[static_cast<std::size_t>(s)]; }

Signal parse_signal(std::string_view s) {
  for (std::size_t i = 0; i < kSignalCount; ++i)
    if (kSignalNames[i] == s) return static_cast<Signal>(i);
  throw ConfigError("unknown signal '" + std::string(s) + "'");
}

const std::array<Signal, kSignalCount>& all_signals() {
  static const std::array<Signal, kSignalCount> s = {Signal::expert_keywords, Signal::mined_keywords, Signal::human,
                                                     Signal::anomaly, Signal::network};
  return s;
}

std::map<std::string, std::string> select_best_per_family(std::span<const FamilyEval> evals,
                                                          std::span<const std::string> families,
                                                          std::span<const std::string> classifier_order) {
  auto rank = [&](const std::string& c) {
    const auto it = std::find(classifier_order.begin(), classifier_order.end(), c);
    return static_cast<std::size_t>(it - classifier_order.begin());
  };
  std::map<std::string, std::string> out;
  for (const auto& fam : families) {
    const FamilyEval* best = nullptr;
    for (const auto& e : evals) {
      if (e.family != fam) continue;
      if (!best || e.auc > best->auc || (e.auc == best->auc && rank(e.classifier) < rank(best->classifier)))
        best = &e;
    }
    if (!best) throw ConfigError("no classifier evaluation for family '" + fam + "'");
    out[fam] = best->classifier;
  }
  return out;
}

Dataset build_meta_dataset(std::span<const BaseSignalBundle> bundles, std::span<const Label> labels) {
  if (bundles.size() != labels.size()) throw ConfigError("bundle and label counts differ");
  Dataset out(std::string(kMetaSchema), kSignalCount);
  std::array<double, kSignalCount> row{};
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    for (std::size_t s = 0; s < kSignalCount; ++s) {
      const auto& v = bundles[i].p[s];
      if (!v)
        throw DataError("instance '" + bundles[i].instance_id + "' is missing signal " +
                        std::string(kSignalNames[s]));
      if (!(*v >= 0.0 && *v <= 1.0))
        throw DataError("instance '" + bundles[i].instance_id + "' has signal " + std::string(kSignalNames[s]) +
                        " outside [0, 1]");
      row[s] = *v;
    }
    out.add(row, labels[i], bundles[i].instance_id);
  }
  return out;
}

const std::vector<learners::Kind>& meta_kinds() {
  using learners::Kind;
  static const std::vector<Kind> k = {Kind::adaboost, Kind::naive_bayes, Kind::decision_tree, Kind::logitboost,
                                      Kind::weighted_vote};
  return k;
}

eval::EvalReport evaluate_meta(const learners::AlgorithmSpec& spec, const Dataset& meta_dataset, double threshold) {
  const auto& kinds = meta_kinds();
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
    throw ConfigError(std::string(learners::to_string(spec.kind)) + " is not a meta learner");
  if (meta_dataset.size() < 2) throw InsufficientData("meta evaluation needs at least two instances");
  auto scores = eval::loocv(meta_dataset, spec);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < meta_dataset.size(); ++i) ids.push_back(meta_dataset.id(i));
  return eval::make_report(std::move(ids), meta_dataset.labels(), std::move(scores), threshold);
}

}  // namespace fluscope::meta
