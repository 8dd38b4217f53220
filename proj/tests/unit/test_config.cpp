#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "fluscope/config.hpp"
#include "fluscope/rng.hpp"

using namespace fluscope;
using namespace fluscope::config;

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto c = parse("");
  CHECK(c.seed == 7);
  CHECK(c.folds == 10);
  CHECK(c.mined_k == std::vector<std::size_t>{10, 100});
  CHECK(c.meta_classifiers.size() == 5);
  CHECK(c.collector.accounts == 1000);
  CHECK(c.synthetic_config().n_seed_users == 226);
}

TEST_CASE("file values and environment overrides") {
  const std::string text = R"(
seed = 11
[signals]
folds = 5
mined_k = [10]
classifiers = ["naive_bayes", "j48"]
[hyperparameters.random_forest]
n_trees = 20
)";
  const auto c = parse(text);
  CHECK(c.seed == 11);
  CHECK(c.folds == 5);
  CHECK(c.mined_k == std::vector<std::size_t>{10});
  CHECK(c.base_classifiers == std::vector<learners::Kind>{learners::Kind::naive_bayes, learners::Kind::decision_tree});
  CHECK(c.spec(learners::Kind::random_forest).get_int("n_trees", 100) == 20);

  const Environment env{{"FLUSCOPE_SEED", "99"}, {"FLUSCOPE_SIGNALS_FOLDS", "4"}, {"FLUSCOPE_OUT_DIR", "/tmp/x"},
                        {"FLUSCOPE_SIGNALS_IG_SCOPE", "full"}};
  const auto e = parse(text, env);
  CHECK(e.seed == 99);
  CHECK(e.folds == 4);
  CHECK(e.out_dir == "/tmp/x");
  CHECK(e.ig_scope == pipeline::IgScope::full);
  CHECK(e.signal_config().seed == 99);
}

TEST_CASE("unknown keys and bad values are errors") {
  CHECK_THROWS_AS(parse("colour = 3"), ConfigError);
  CHECK_THROWS_AS(parse("[signals]\nfoldz = 3"), ConfigError);
  CHECK_THROWS_AS(parse("[nowhere]\nx = 1"), ConfigError);
  CHECK_THROWS_AS(parse("[signals]\nfolds = \"ten\""), ConfigError);
  CHECK_THROWS_AS(parse("[signals]\nfolds = 1"), ConfigError);
  CHECK_THROWS_AS(parse("[hyperparameters.naive_bayes]\ndepth = 2"), ConfigError);
  CHECK_THROWS_AS(parse("", {{"FLUSCOPE_SIGNALS_NOPE", "1"}}), ConfigError);
  CHECK_THROWS_AS(parse("seed = "), ConfigError);
  try {
    parse("[signals]\nfoldz = 3");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("foldz") != std::string::npos);
  }
}

TEST_CASE("resolved config round trips through TOML") {
  auto c = parse("seed = 3\n[anova]\nrepeats = 2\n[hyperparameters.adaboost]\nrounds = 7\n",
                 {{"FLUSCOPE_COLLECTOR_DAYS", "2.5"}});
  const auto text = to_toml(c);
  const auto back = parse(text);
  CHECK(to_toml(back) == text);
  CHECK(back.collector.days == 2.5);
  CHECK(back.spec(learners::Kind::adaboost).get_int("rounds", 50) == 7);
}

TEST_CASE("load reads a file") {
  const auto path = std::filesystem::temp_directory_path() / "fluscope_config_test.toml";
  std::ofstream(path) << "seed = 21\n";
  CHECK(load(path, {}).seed == 21);
  CHECK_THROWS_AS(load(path.string() + ".missing", {}), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(7, "learner", "naive_bayes") == derive_seed(7, "learner", "naive_bayes"));
  CHECK(derive_seed(7, "learner", "naive_bayes") != derive_seed(8, "learner", "naive_bayes"));
  CHECK(derive_seed(7, "learner", "naive_bayes") != derive_seed(7, "learner", "random_forest"));
  CHECK(derive_seed(7, "eval", "repeat", 1) != derive_seed(7, "eval", "repeat", 2));
}

}  // TEST_SUITE
