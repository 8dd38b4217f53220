#include <fstream>
#include <sstream>

#include "learners_impl.hpp"

namespace fluscope::learners {

namespace {

constexpr const char* kFormat = "fluscope-model";
constexpr int kVersion = 1;

json hyper_to_json(const HyperValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

HyperValue hyper_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_array()) return j.get<std::vector<double>>();
  throw DataError("unsupported hyperparameter value " + j.dump());
}

ImplPtr restore(Kind kind, const json& s) {
  if (s.contains("constant")) return std::make_shared<ConstantModel>(s.at("constant").get<double>());
  switch (kind) {
    case Kind::naive_bayes: return restore_naive_bayes(s);
    case Kind::logistic_regression: return restore_logistic_regression(s);
    case Kind::decision_tree: return restore_decision_tree(s);
    case Kind::random_forest: return restore_random_forest(s);
    case Kind::linear_svm: return restore_linear_svm(s);
    case Kind::adaboost: return restore_adaboost(s);
    case Kind::logitboost: return restore_logitboost(s);
    case Kind::weighted_vote: return restore_weighted_vote(s);
  }
  throw DataError("unknown model kind");
}

}  // namespace

std::string model_to_json(const Model& m) {
  json hp = json::object();
  for (const auto& [k, v] : m.spec().hyperparameters) hp[k] = hyper_to_json(v);
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"kind", to_string(m.kind())},
              {"schema_id", m.schema_id()},
              {"n_features", m.n_features()},
              {"rng_seed", m.spec().rng_seed},
              {"hyperparameters", hp},
              {"state", m.impl().state()}};
  return doc.dump();
}

Model model_from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) throw DataError("not a fluscope model artifact");
    if (doc.at("version").get<int>() != kVersion)
      throw DataError("unsupported model artifact version " + doc.at("version").dump());
    AlgorithmSpec spec;
    spec.kind = parse_kind(doc.at("kind").get<std::string>());
    spec.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    for (const auto& [k, v] : doc.at("hyperparameters").items()) spec.hyperparameters[k] = hyper_from_json(v);
    validate(spec);
    return Model(spec, doc.at("schema_id").get<std::string>(), doc.at("n_features").get<std::size_t>(),
                 restore(spec.kind, doc.at("state")));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model artifact: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model artifact: ") + e.what());
  }
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model to " + path);
  out << model_to_json(m) << '\n';
  if (!out) throw DataError("cannot write model to " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model from " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace fluscope::learners
