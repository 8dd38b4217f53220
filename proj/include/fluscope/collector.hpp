#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fluscope/corpus.hpp"

namespace fluscope::collector {

enum class Endpoint { tweets = 0, profile, followers };
inline constexpr std::size_t kEndpointCount = 3;
std::string_view to_string(Endpoint e);
Endpoint parse_endpoint(std::string_view s);

inline constexpr double kDay = 86400.0;

/// `capacity` queries per sliding window of `window` seconds.
struct EndpointLimit {
  Endpoint endpoint = Endpoint::tweets;
  std::uint64_t capacity = 15;
  double window = 900.0;

  bool operator==(const EndpointLimit&) const = default;
};

struct AccountState {
  std::string account_id;
  bool is_seed = false;
  std::array<std::optional<double>, kEndpointCount> last_queried;

  bool operator==(const AccountState&) const = default;
};

struct SchedulerConfig {
  std::array<EndpointLimit, kEndpointCount> limits = {EndpointLimit{Endpoint::tweets, 15, 900.0},
                                                      EndpointLimit{Endpoint::profile, 15, 900.0},
                                                      EndpointLimit{Endpoint::followers, 15, 900.0}};
  /// Minimum spacing of tweets-endpoint queries to one account.
  double tweet_requery_interval = 3 * kDay;

  /// Throws ConfigError unless every capacity >= 1 and window > 0.
  void validate() const;
  bool operator==(const SchedulerConfig&) const = default;
};

struct Query {
  std::uint64_t id = 0;  // issue order
  std::size_t account = 0;
  Endpoint endpoint = Endpoint::tweets;
  double issued_at = 0.0;

  bool operator==(const Query&) const = default;
};

struct QueryResult {
  std::uint64_t fetched = 0;  // new tweets returned
};

/// Single-threaded scheduler state. Issued queries occupy window capacity from
/// issue until their response has aged out of the window.
class Scheduler {
 public:
  Scheduler(std::vector<AccountState> accounts, SchedulerConfig config);

  /// Queries to issue at `now`, endpoints in enum order. Within an endpoint:
  /// eligible seeds first, then least recently queried (never queried first),
  /// then account id. The batch is marked in flight.
  std::vector<Query> next_batch(double now);
  /// Marks a query as in flight (used by next_batch and by replay).
  void issue(const Query& q);
  /// Throws DataError for a query that is not in flight.
  void record_response(const Query& q, const QueryResult& result, double now);

  bool eligible(std::size_t account, Endpoint e, double now) const;
  /// Issued queries still counted against the window at `now`.
  std::uint64_t usage(Endpoint e, double now) const;
  std::uint64_t remaining(Endpoint e, double now) const;
  /// Earliest instant after `now` at which capacity frees up or an account
  /// becomes eligible; nullopt when nothing changes without a response.
  std::optional<double> next_change(double now) const;

  const std::vector<AccountState>& accounts() const { return accounts_; }
  const SchedulerConfig& config() const { return config_; }
  const std::vector<Query>& in_flight() const { return in_flight_; }
  /// Response instants per endpoint, ascending.
  const std::array<std::vector<double>, kEndpointCount>& usage_log() const { return usage_log_; }
  std::uint64_t issued_count() const { return next_id_; }

  bool operator==(const Scheduler& o) const {
    return accounts_ == o.accounts_ && config_ == o.config_ && in_flight_ == o.in_flight_ &&
           usage_log_ == o.usage_log_ && next_id_ == o.next_id_;
  }

 private:
  std::vector<AccountState> accounts_;
  SchedulerConfig config_;
  std::vector<Query> in_flight_;
  std::array<std::vector<double>, kEndpointCount> usage_log_;
  std::vector<std::array<bool, kEndpointCount>> busy_;
  std::uint64_t next_id_ = 0;
};

/// Mock universe: accounts with a steady tweet rate.
struct MockAccount {
  std::string account_id;
  bool is_seed = false;
  double tweets_per_day = 1.0;
};

struct World {
  std::vector<MockAccount> accounts;
};

/// Accounts of a cohort; rates from each account's tweets over the window.
World world_from_cohort(const corpus::Cohort& cohort);
/// `n_accounts` accounts of which the first `n_seeds` are seeds, rates log-normal.
World synthetic_world(std::size_t n_accounts, std::size_t n_seeds, std::uint64_t seed);

/// Answers a query at a given instant.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual QueryResult fetch(const Query& q, double now) = 0;
};

/// Poisson tweet arrivals since the account's previous fetch, capped at the
/// fetch ceiling; profile and follower queries return nothing.
class MockTransport : public Transport {
 public:
  MockTransport(const World& world, std::uint64_t seed, std::uint64_t fetch_ceiling = 3000);
  QueryResult fetch(const Query& q, double now) override;

 private:
  const World& world_;
  std::uint64_t seed_;
  std::uint64_t ceiling_;
  std::vector<double> last_fetch_;
};

enum class Action { issue, response };

struct TraceEvent {
  double t = 0.0;
  std::size_t account = 0;
  Endpoint endpoint = Endpoint::tweets;
  Action action = Action::issue;
  std::uint64_t query = 0;
  std::uint64_t fetched = 0;
};

struct SimulationConfig {
  double duration = 30 * kDay;
  SchedulerConfig scheduler;
  double latency = 0.0;  // response delay after issue
  std::uint64_t fetch_ceiling = 3000;
  std::uint64_t seed = 7;
};

struct CoverageReport {
  std::vector<std::array<std::uint64_t, kEndpointCount>> queries;  // per account
  std::vector<double> max_tweet_staleness;  // longest gap without a tweets query, per account
  std::uint64_t fetched = 0;
  std::uint64_t limit_violations = 0;
  std::uint64_t requery_violations = 0;
  std::uint64_t priority_violations = 0;
  double seed_staleness_ceiling = 0.0;
  double max_seed_staleness = 0.0;
};

struct SimulationResult {
  std::vector<TraceEvent> trace;
  std::vector<std::vector<Query>> batches;
  CoverageReport coverage;
  Scheduler final_state;
};

/// Event-driven run from t = 0 until `duration` (exclusive). The clock is
/// simulated; `sink` receives every response.
SimulationResult simulate(const World& world, const SimulationConfig& config,
                          const std::function<void(const TraceEvent&)>& sink = {});

/// Independent scan of a trace: window safety per endpoint, the re-query rule,
/// per-account counts and staleness. Priority is checked by
/// priority_violations on the recorded batches.
CoverageReport scan_trace(const std::vector<TraceEvent>& trace, const World& world, const SimulationConfig& config);

/// Batches where a non-seed precedes a seed that was eligible at issue time
/// on the same endpoint, recomputed from the trace alone.
std::uint64_t priority_violations(const std::vector<TraceEvent>& trace, const World& world,
                                  const SimulationConfig& config);

/// Rebuilds the scheduler state by applying the trace's issue and response events.
Scheduler replay(const std::vector<TraceEvent>& trace, const World& world, const SchedulerConfig& config);

/// {"t":...,"account":"id","endpoint":"tweets","action":"issue"} per line.
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace, const World& world);

std::vector<AccountState> initial_accounts(const World& world);

}  // namespace fluscope::collector
