#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FLUSCOPE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fluscope_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(run("--no-such-flag", dir / "log") == 2);
  CHECK(run("", dir / "log") == 2);
  CHECK(run("generate --users -3", dir / "log") == 2);
  CHECK(run("stats --fisher 1 2", dir / "log") == 2);
}

TEST_CASE("data errors exit with 1") {
  const auto dir = scratch("data");
  CHECK(run("signals --data " + (dir / "missing").string() + " --out-dir " + (dir / "o").string(), dir / "log") == 1);
  std::ofstream(dir / "bad.toml") << "[signals]\nfoldz = 3\n";
  CHECK(run("--config " + (dir / "bad.toml").string() + " stats --fisher 1 2 3 4", dir / "log") == 1);
}

TEST_CASE("stats prints a Fisher test") {
  const auto dir = scratch("stats");
  REQUIRE(run("stats --fisher 3 1 1 3", dir / "log") == 0);
  const auto out = slurp(dir / "log");
  CHECK(out.find("4.857143e-01") != std::string::npos);
}

TEST_CASE("generate then meta run") {
  const auto dir = scratch("meta");
  const auto cohort = dir / "cohort";
  REQUIRE(run("generate --seed 7 --users 40 --out-dir " + cohort.string(), dir / "log") == 0);
  for (const char* f : {"users.jsonl", "tweets.jsonl", "edges.jsonl", "annotations.jsonl", "manifest.json"})
    CHECK(fs::exists(cohort / f));
  REQUIRE(run("meta run --data " + cohort.string() + " --out-dir " + (dir / "m").string(), dir / "log") == 0);
  const auto tsv = slurp(dir / "m" / "meta.tsv");
  CHECK(lines(tsv) == 1 + 5 + 1);
  CHECK(tsv.find("baseline") != std::string::npos);
  CHECK(fs::exists(dir / "m" / "config.toml"));
}

TEST_CASE("train and predict round trip") {
  const auto dir = scratch("train");
  {
    std::ofstream f(dir / "features.csv");
    f << "id,label,x,y\n";
    for (int i = 0; i < 20; ++i) f << "r" << i << "," << (i % 2 ? "sick" : "not_sick") << "," << (i % 2 ? 1.5 : -1.5) << "," << i << "\n";
  }
  REQUIRE(run("train --features " + (dir / "features.csv").string() + " --algorithm j48 --param min_leaf=1 --out-dir " +
                  dir.string(),
              dir / "log") == 0);
  REQUIRE(fs::exists(dir / "model.json"));
  REQUIRE(run("predict --features " + (dir / "features.csv").string() + " --model " + (dir / "model.json").string() +
                  " --out-dir " + dir.string(),
              dir / "log") == 0);
  CHECK(lines(slurp(dir / "predictions.csv")) == 21);
  CHECK(run("train --features " + (dir / "features.csv").string() + " --algorithm perceptron --out-dir " + dir.string(),
            dir / "log") == 1);
}

TEST_CASE("collect simulate writes a clean coverage report") {
  const auto dir = scratch("collect");
  REQUIRE(run("collect simulate --days 2 --accounts 50 --seeds 5 --out-dir " + dir.string(), dir / "log") == 0);
  CHECK(fs::exists(dir / "trace.jsonl"));
  CHECK(fs::exists(dir / "coverage.tsv"));
}

}  // TEST_SUITE
