#include <doctest.h>

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

#include "fluscope/collector.hpp"

using namespace fluscope;
using namespace fluscope::collector;

namespace {

SchedulerConfig uniform_limits(std::uint64_t capacity, double window, double interval = 3 * kDay) {
  SchedulerConfig c;
  for (std::size_t e = 0; e < kEndpointCount; ++e) c.limits[e] = {static_cast<Endpoint>(e), capacity, window};
  c.tweet_requery_interval = interval;
  return c;
}

std::vector<Query> of_endpoint(const std::vector<Query>& batch, Endpoint e) {
  std::vector<Query> out;
  for (const auto& q : batch)
    if (q.endpoint == e) out.push_back(q);
  return out;
}

// Replays a trace with an independent model of the scheduler state and checks
// every batch against a full re-sort of the eligible accounts.
struct ResortOracle {
  const World& world;
  SimulationConfig config;
  std::vector<std::array<std::optional<double>, kEndpointCount>> last;
  std::vector<std::array<bool, kEndpointCount>> busy;
  std::array<std::vector<double>, kEndpointCount> responses;
  std::array<std::size_t, kEndpointCount> in_flight{};
  std::size_t batches = 0, mismatches = 0;

  ResortOracle(const World& w, const SimulationConfig& c)
      : world(w), config(c), last(w.accounts.size()), busy(w.accounts.size(), {false, false, false}) {}

  std::vector<std::size_t> expected(Endpoint e, double t) const {
    const auto ei = static_cast<std::size_t>(e);
    const auto& lim = config.scheduler.limits[ei];
    std::size_t used = in_flight[ei];
    for (double s : responses[ei]) used += s + lim.window > t;
    const std::size_t room = used >= lim.capacity ? 0 : lim.capacity - used;
    std::vector<std::tuple<int, int, double, std::string, std::size_t>> keys;
    for (std::size_t a = 0; a < world.accounts.size(); ++a) {
      if (busy[a][ei]) continue;
      const auto& l = last[a][ei];
      if (e == Endpoint::tweets && l && *l + config.scheduler.tweet_requery_interval > t) continue;
      keys.emplace_back(world.accounts[a].is_seed ? 0 : 1, l ? 1 : 0, l.value_or(0.0), world.accounts[a].account_id, a);
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(room, keys.size()); ++i) out.push_back(std::get<4>(keys[i]));
    return out;
  }

  void check_batch(const std::vector<TraceEvent>& issues) {
    ++batches;
    const double t = issues.front().t;
    for (std::size_t e = 0; e < kEndpointCount; ++e) {
      std::vector<std::size_t> got;
      for (const auto& ev : issues)
        if (static_cast<std::size_t>(ev.endpoint) == e) got.push_back(ev.account);
      if (got != expected(static_cast<Endpoint>(e), t)) ++mismatches;
    }
    for (const auto& ev : issues) {
      busy[ev.account][static_cast<std::size_t>(ev.endpoint)] = true;
      ++in_flight[static_cast<std::size_t>(ev.endpoint)];
    }
  }

  void run(const std::vector<TraceEvent>& trace) {
    std::vector<TraceEvent> pending;
    for (const auto& ev : trace) {
      if (ev.action == Action::issue) {
        if (!pending.empty() && pending.front().t != ev.t) {
          check_batch(pending);
          pending.clear();
        }
        pending.push_back(ev);
        continue;
      }
      if (!pending.empty()) {
        check_batch(pending);
        pending.clear();
      }
      const auto ei = static_cast<std::size_t>(ev.endpoint);
      busy[ev.account][ei] = false;
      --in_flight[ei];
      last[ev.account][ei] = ev.t;
      responses[ei].push_back(ev.t);
    }
    if (!pending.empty()) check_batch(pending);
  }
};

}  // namespace

TEST_SUITE("collector") {

TEST_CASE("no accounts give an empty batch") {
  Scheduler s({}, SchedulerConfig{});
  CHECK(s.next_batch(0.0).empty());
  CHECK_FALSE(s.next_change(0.0).has_value());
}

TEST_CASE("seed first then the least recently queried") {
  std::vector<AccountState> accounts(3);
  accounts[0] = {"b_nonseed_recent", false, {}};
  accounts[0].last_queried[0] = -4 * kDay;
  accounts[1] = {"c_nonseed_old", false, {}};
  accounts[1].last_queried[0] = -5 * kDay;
  accounts[2] = {"z_seed", true, {}};
  Scheduler s(accounts, uniform_limits(2, 900.0));
  const auto tweets = of_endpoint(s.next_batch(0.0), Endpoint::tweets);
  REQUIRE(tweets.size() == 2);
  CHECK(tweets[0].account == 2);
  CHECK(tweets[1].account == 1);
  CHECK(s.usage(Endpoint::tweets, 0.0) == 2);
  CHECK(s.remaining(Endpoint::tweets, 0.0) == 0);
}

TEST_CASE("responses update state and the usage log") {
  std::vector<AccountState> accounts{{"a", true, {}}};
  Scheduler s(accounts, uniform_limits(5, 100.0));
  const auto batch = s.next_batch(10.0);
  REQUIRE(batch.size() == 3);
  const auto before = s.usage_log()[0].size();
  s.record_response(batch[0], {4}, 12.0);
  CHECK(s.accounts()[0].last_queried[0] == 12.0);
  CHECK(s.usage_log()[0].size() == before + 1);
  CHECK(s.usage(Endpoint::tweets, 50.0) == 1);
  CHECK(s.usage(Endpoint::tweets, 112.0) == 0);
  CHECK_THROWS_AS(s.record_response(batch[0], {0}, 13.0), DataError);
  Query ghost{999, 0, Endpoint::profile, 0.0};
  CHECK_THROWS_AS(s.record_response(ghost, {0}, 13.0), DataError);
  CHECK_THROWS_AS(SchedulerConfig(uniform_limits(0, 10.0)).validate(), ConfigError);
}

TEST_CASE("zero duration gives an empty trace") {
  SimulationConfig cfg;
  cfg.duration = 0.0;
  const auto world = synthetic_world(10, 2, 1);
  CHECK(simulate(world, cfg).trace.empty());
}

TEST_CASE("hand schedule under the three day rule") {
  World world{{{"only", true, 5.0}}};
  SimulationConfig cfg;
  cfg.duration = 10 * kDay;
  cfg.scheduler = uniform_limits(1, kDay);
  const auto r = simulate(world, cfg);
  std::vector<double> tweet_issues;
  for (const auto& ev : r.trace)
    if (ev.action == Action::issue && ev.endpoint == Endpoint::tweets) tweet_issues.push_back(ev.t);
  CHECK(tweet_issues == std::vector<double>{0.0, 3 * kDay, 6 * kDay, 9 * kDay});
  CHECK(r.coverage.limit_violations == 0);
  CHECK(r.coverage.requery_violations == 0);
}

TEST_CASE("batches match a brute-force re-sort at every step") {
  const auto world = synthetic_world(60, 8, 5);
  SimulationConfig cfg;
  cfg.duration = 14 * kDay;
  cfg.latency = 30.0;
  cfg.scheduler.limits[0] = {Endpoint::tweets, 2, 900.0};
  cfg.scheduler.limits[1] = {Endpoint::profile, 3, 600.0};
  cfg.scheduler.limits[2] = {Endpoint::followers, 1, 45.0};
  cfg.scheduler.tweet_requery_interval = 6 * 3600.0;
  const auto r = simulate(world, cfg);
  ResortOracle oracle(world, cfg);
  oracle.run(r.trace);
  CHECK(oracle.batches == r.batches.size());
  CHECK(oracle.batches >= 10000);
  CHECK(oracle.mismatches == 0);
  CHECK(r.coverage.limit_violations == 0);
  CHECK(r.coverage.requery_violations == 0);
  CHECK(priority_violations(r.trace, world, cfg) == 0);
  CHECK(replay(r.trace, world, cfg.scheduler) == r.final_state);
}

TEST_CASE("a thousand accounts over thirty days stay within every rule") {
  const auto world = synthetic_world(1000, 100, 7);
  SimulationConfig cfg;
  const auto r = simulate(world, cfg);
  CHECK(r.coverage.limit_violations == 0);
  CHECK(r.coverage.requery_violations == 0);
  CHECK(r.coverage.priority_violations == 0);
  CHECK(priority_violations(r.trace, world, cfg) == 0);
  CHECK(r.coverage.max_seed_staleness <= r.coverage.seed_staleness_ceiling);
  CHECK(replay(r.trace, world, cfg.scheduler) == r.final_state);
}

TEST_CASE("trace scan detects injected violations") {
  World world{{{"a", true, 1.0}, {"b", false, 1.0}}};
  SimulationConfig cfg;
  cfg.scheduler = uniform_limits(1, 900.0);
  std::vector<TraceEvent> trace{
      {0.0, 0, Endpoint::tweets, Action::issue, 0, 0},  {0.0, 0, Endpoint::tweets, Action::response, 0, 0},
      {10.0, 1, Endpoint::tweets, Action::issue, 1, 0}, {10.0, 1, Endpoint::tweets, Action::response, 1, 0},
      {kDay, 0, Endpoint::tweets, Action::issue, 2, 0}, {kDay, 0, Endpoint::tweets, Action::response, 2, 0},
  };
  const auto c = scan_trace(trace, world, cfg);
  CHECK(c.limit_violations >= 1);
  CHECK(c.requery_violations == 1);

  std::vector<TraceEvent> unfair{
      {0.0, 1, Endpoint::tweets, Action::issue, 0, 0},
      {0.0, 1, Endpoint::tweets, Action::response, 0, 0},
  };
  CHECK(priority_violations(unfair, world, cfg) == 1);
}

TEST_CASE("trace serializes as JSON lines") {
  World world{{{"a", true, 1.0}}};
  std::vector<TraceEvent> trace{{0.0, 0, Endpoint::tweets, Action::issue, 0, 0}};
  const auto text = trace_to_jsonl(trace, world);
  CHECK(text.find("\"account\":\"a\"") != std::string::npos);
  CHECK(text.find("\"endpoint\":\"tweets\"") != std::string::npos);
  CHECK(text.back() == '\n');
}

}  // TEST_SUITE
