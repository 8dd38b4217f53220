#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fluscope/corpus.hpp"
#include "fluscope/synthetic.hpp"
#include "fluscope/textprep.hpp"

using namespace fluscope;
using namespace fluscope::corpus;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fluscope_corpus_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::int64_t ts(const char* s) { return parse_timestamp(s); }

Cohort small_cohort() {
  std::vector<UserRecord> users{{"u1", YearMonth{2013, 1}, true}, {"u2", std::nullopt, true},
                                {"f1", std::nullopt, false}};
  std::vector<TweetRecord> tweets{
      {"u1", ts("2013-01-05T10:00:00Z"), "got the flu"},
      {"u1", ts("2013-01-06T10:00:00Z"), "fever again"},
      {"u2", ts("2012-12-31T23:59:59Z"), "new year soon"},
      {"f1", ts("2013-01-02T00:00:00Z"), "ab"},
      {"f1", ts("2013-01-03T00:00:00Z"), "cd"},
      {"f1", ts("2013-02-03T00:00:00Z"), "later"},
  };
  std::vector<EdgeRecord> edges{{"f1", "u1"}, {"u2", "f1"}};
  return Cohort(StudyWindow{{2012, 11}, {2013, 4}}, users, tweets, edges, {});
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("loads a small cohort from JSONL") {
  const auto dir = scratch("load");
  std::ofstream(dir / "users.jsonl") << R"({"user_id":"a","diagnosed_month":null,"is_seed":true})" << "\n"
                                     << R"({"user_id":"b","diagnosed_month":"2013-01","is_seed":true})" << "\n";
  std::ofstream(dir / "tweets.jsonl")
      << R"({"user_id":"a","timestamp":"2013-01-01T00:00:00Z","text":"one"})" << "\n"
      << R"({"user_id":"a","timestamp":"2013-01-02T00:00:00Z","text":"two"})" << "\n"
      << R"({"user_id":"b","timestamp":"2013-01-03T00:00:00Z","text":"three"})" << "\n"
      << R"({"user_id":"b","timestamp":"2013-02-03T00:00:00Z","text":"four"})" << "\n"
      << R"({"user_id":"b","timestamp":"2013-03-03T00:00:00Z","text":"five"})" << "\n";
  std::ofstream(dir / "edges.jsonl");
  const auto c = load_cohort(dir);
  CHECK(c.users().size() == 2);
  CHECK(c.tweets().size() == 5);
  CHECK(c.edges().empty());
  CHECK(c.window() == StudyWindow{{2013, 1}, {2013, 3}});
}

TEST_CASE("bad timestamp reports the file and line") {
  const auto dir = scratch("badts");
  std::ofstream(dir / "users.jsonl") << R"({"user_id":"a","diagnosed_month":null,"is_seed":true})" << "\n";
  std::ofstream(dir / "tweets.jsonl")
      << R"({"user_id":"a","timestamp":"2013-01-01T00:00:00Z","text":"one"})" << "\n"
      << R"({"user_id":"a","timestamp":"01/02/2013","text":"two"})" << "\n";
  std::ofstream(dir / "edges.jsonl");
  try {
    load_cohort(dir);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("tweets.jsonl") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
  }
}

TEST_CASE("invalid records are rejected") {
  std::vector<UserRecord> users{{"a", std::nullopt, true}, {"a", std::nullopt, true}};
  CHECK_THROWS_AS(Cohort(StudyWindow{}, users, {}, {}, {}), DataError);
  std::vector<UserRecord> one{{"a", std::nullopt, true}};
  std::vector<TweetRecord> orphan{{"zz", ts("2013-01-01T00:00:00Z"), "x"}};
  CHECK_THROWS_AS(Cohort(StudyWindow{}, one, orphan, {}, {}), DataError);
  std::vector<EdgeRecord> self{{"a", "a"}};
  CHECK_THROWS_AS(Cohort(StudyWindow{}, one, {}, self, {}), DataError);
}

TEST_CASE("synthetic cohort round trips through disk") {
  SyntheticConfig cfg;
  cfg.n_seed_users = 20;
  const auto c = generate_synthetic_cohort(cfg);
  const auto dir = scratch("roundtrip");
  save_cohort(c, dir);
  const auto back = load_cohort(dir);
  CHECK(back == c);

  const auto dir2 = scratch("roundtrip2");
  save_cohort(generate_synthetic_cohort(cfg), dir2);
  for (const char* f : {"users.jsonl", "tweets.jsonl", "edges.jsonl", "annotations.jsonl", "manifest.json"})
    CHECK(slurp(dir / f) == slurp(dir2 / f));
}

TEST_CASE("synthetic cohort marginals") {
  SyntheticConfig cfg;
  const auto c = generate_synthetic_cohort(cfg);
  const auto diagnosed = std::count_if(c.users().begin(), c.users().end(),
                                       [](const UserRecord& u) { return u.is_seed && u.diagnosed_month; });
  CHECK(diagnosed == 104);
  CHECK(c.seed_accounts().size() == 226);
  const auto months = partition_user_months(c);
  CHECK(months.size() == 1808);

  cfg.sick_fraction = 0.0;
  cfg.n_seed_users = 30;
  const auto healthy = generate_synthetic_cohort(cfg);
  for (const auto& m : partition_user_months(healthy)) CHECK(m.label == Label::not_sick);

  SyntheticConfig other;
  other.rng_seed = 8;
  CHECK_FALSE(generate_synthetic_cohort(other) == c);
}

TEST_CASE("partition bins tweets by calendar month") {
  const auto c = small_cohort();
  const auto months = partition_user_months(c);
  REQUIRE(months.size() == 12);
  std::size_t sick = 0;
  for (const auto& m : months) {
    sick += is_sick(m.label);
    for (auto ref : m.tweet_refs) CHECK(YearMonth::of_timestamp(c.tweets()[ref].timestamp) == m.month);
  }
  CHECK(sick == 1);
  CHECK(months[2].month == YearMonth{2013, 1});
  CHECK(months[2].tweet_refs.size() == 2);
  CHECK(months[2].label == Label::sick);
  CHECK(months[6 + 1].tweet_refs.size() == 1);
  CHECK(months[2].id() == "u1@2013-01");
}

TEST_CASE("zero tweet diagnosis month policy") {
  std::vector<UserRecord> users{{"u", YearMonth{2013, 2}, true}};
  std::vector<TweetRecord> tweets{{"u", ts("2013-01-05T00:00:00Z"), "hello"}};
  const Cohort c(StudyWindow{{2013, 1}, {2013, 3}}, users, tweets, {}, {});
  const auto keep = partition_user_months(c, ZeroTweetSickPolicy::keep_sick);
  CHECK(keep[1].label == Label::sick);
  CHECK(keep[1].tweet_refs.empty());
  const auto relabel = partition_user_months(c, ZeroTweetSickPolicy::relabel_control);
  CHECK(relabel[1].label == Label::not_sick);
}

TEST_CASE("network streams") {
  const auto c = small_cohort();
  const auto s = assemble_network_stream(c, "u1", YearMonth{2013, 1}, Direction::followers);
  CHECK(s.texts.size() == 2);
  CHECK(s.char_count == 4);
  CHECK(assemble_network_stream(c, "u1", YearMonth{2013, 1}, Direction::friends).texts.empty());
  CHECK(assemble_network_stream(c, "u1", YearMonth{2013, 1}, Direction::friends).char_count == 0);
  const auto f = assemble_network_stream(c, "u2", YearMonth{2013, 2}, Direction::friends);
  CHECK(f.texts.size() == 1);
  CHECK(f.char_count == 5);
}

TEST_CASE("network streams match a brute-force filter on a synthetic cohort") {
  SyntheticConfig cfg;
  cfg.n_seed_users = 25;
  const auto c = generate_synthetic_cohort(cfg);
  for (const auto seed : c.seed_accounts()) {
    const auto& uid = c.account_id(seed);
    for (const auto month : c.window().months()) {
      for (const auto dir : {Direction::followers, Direction::friends}) {
        std::set<std::string> peers;
        for (const auto& e : c.edges()) {
          if (dir == Direction::followers && e.followee_id == uid) peers.insert(e.follower_id);
          if (dir == Direction::friends && e.follower_id == uid) peers.insert(e.followee_id);
        }
        std::multiset<std::size_t> expected;
        std::size_t chars = 0;
        for (std::size_t t = 0; t < c.tweets().size(); ++t) {
          const auto& tw = c.tweets()[t];
          if (peers.count(tw.user_id) && YearMonth::of_timestamp(tw.timestamp) == month) {
            expected.insert(t);
            chars += textprep::char_count(tw.text);
          }
        }
        const auto s = assemble_network_stream(c, uid, month, dir);
        CHECK(std::multiset<std::size_t>(s.tweet_refs.begin(), s.tweet_refs.end()) == expected);
        CHECK(s.char_count == chars);
        for (auto ref : s.tweet_refs) CHECK(c.tweets()[ref].user_id != uid);
      }
    }
  }
}

TEST_CASE("annotations are validated against the cohort") {
  std::vector<UserRecord> users{{"u1", YearMonth{2013, 1}, true}};
  std::vector<TweetRecord> tweets;
  for (int i = 0; i < 10; ++i) tweets.push_back({"u1", ts("2013-01-05T00:00:00Z") + i, "t"});
  const Cohort c(StudyWindow{{2013, 1}, {2013, 2}}, users, tweets, {}, {});
  const auto dir = scratch("ann");
  std::ofstream(dir / "empty.jsonl");
  CHECK(load_annotations(dir / "empty.jsonl", c).empty());
  std::ofstream(dir / "ok.jsonl") << R"({"user_id":"u1","month":"2013-01","sick_tweet_count":3})" << "\n";
  const auto ok = load_annotations(dir / "ok.jsonl", c);
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].sick_tweet_count == 3);
  std::ofstream(dir / "bad.jsonl") << R"({"user_id":"u1","month":"2013-01","sick_tweet_count":11})" << "\n";
  CHECK_THROWS_AS(load_annotations(dir / "bad.jsonl", c), DataError);
}

}  // TEST_SUITE
