#include "fluscope/collector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include <json.hpp>

#include "fluscope/rng.hpp"

namespace fluscope::collector {

namespace {
constexpr std::array<std::string_view, kEndpointCount> kEndpointNames = {"tweets", "profile", "followers"};
constexpr auto kTweets = static_cast<std::size_t>(Endpoint::tweets);

std::size_t idx(Endpoint e) { return static_cast<std::size_t>(e); }
}  // namespace

std::string_view to_string(Endpoint e) { return kEndpointNames[idx(e)]; }

Endpoint parse_endpoint(std::string_view s) {
  for (std::size_t i = 0; i < kEndpointCount; ++i)
    if (kEndpointNames[i] == s) return static_cast<Endpoint>(i);
  throw ConfigError("unknown endpoint '" + std::string(s) + "'");
}

void SchedulerConfig::validate() const {
  for (std::size_t i = 0; i < kEndpointCount; ++i) {
    const auto& l = limits[i];
    if (l.endpoint != static_cast<Endpoint>(i)) throw ConfigError("endpoint limits must be listed in endpoint order");
    if (l.capacity < 1) throw ConfigError(std::string(to_string(l.endpoint)) + " capacity must be at least 1");
    if (!(l.window > 0)) throw ConfigError(std::string(to_string(l.endpoint)) + " window must be positive");
  }
  if (!(tweet_requery_interval >= 0)) throw ConfigError("the tweet re-query interval must be non-negative");
}

Scheduler::Scheduler(std::vector<AccountState> accounts, SchedulerConfig config)
    : accounts_(std::move(accounts)), config_(config), busy_(accounts_.size()) {
  config_.validate();
  for (auto& b : busy_) b.fill(false);
}

bool Scheduler::eligible(std::size_t account, Endpoint e, double now) const {
  if (busy_[account][idx(e)]) return false;
  if (e != Endpoint::tweets) return true;
  const auto& last = accounts_[account].last_queried[kTweets];
  return !last || *last + config_.tweet_requery_interval <= now;
}

std::uint64_t Scheduler::usage(Endpoint e, double now) const {
  const auto& log = usage_log_[idx(e)];
  const double w = config_.limits[idx(e)].window;
  const auto first_live = std::partition_point(log.begin(), log.end(), [&](double s) { return !(s + w > now); });
  std::uint64_t n = static_cast<std::uint64_t>(log.end() - first_live);
  for (const auto& q : in_flight_) n += q.endpoint == e ? 1 : 0;
  return n;
}

std::uint64_t Scheduler::remaining(Endpoint e, double now) const {
  const auto cap = config_.limits[idx(e)].capacity;
  const auto used = usage(e, now);
  return used >= cap ? 0 : cap - used;
}

std::vector<Query> Scheduler::next_batch(double now) {
  std::vector<Query> batch;
  for (std::size_t ei = 0; ei < kEndpointCount; ++ei) {
    const auto e = static_cast<Endpoint>(ei);
    const auto rem = remaining(e, now);
    if (rem == 0) continue;
    std::vector<std::size_t> candidates;
    for (std::size_t a = 0; a < accounts_.size(); ++a)
      if (eligible(a, e, now)) candidates.push_back(a);
    const auto before = [&](std::size_t x, std::size_t y) {
      const auto& ax = accounts_[x];
      const auto& ay = accounts_[y];
      if (ax.is_seed != ay.is_seed) return ax.is_seed;
      const auto& lx = ax.last_queried[ei];
      const auto& ly = ay.last_queried[ei];
      if (lx.has_value() != ly.has_value()) return !lx.has_value();
      if (lx && *lx != *ly) return *lx < *ly;
      return ax.account_id < ay.account_id;
    };
    const auto take = std::min<std::size_t>(rem, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      before);
    for (std::size_t i = 0; i < take; ++i) {
      const Query q{next_id_, candidates[i], e, now};
      issue(q);
      batch.push_back(q);
    }
  }
  return batch;
}

void Scheduler::issue(const Query& q) {
  if (q.account >= accounts_.size()) throw DataError("query for unknown account " + std::to_string(q.account));
  if (busy_[q.account][idx(q.endpoint)])
    throw DataError("account " + accounts_[q.account].account_id + " already has a " +
                    std::string(to_string(q.endpoint)) + " query in flight");
  busy_[q.account][idx(q.endpoint)] = true;
  in_flight_.push_back(q);
  next_id_ = std::max(next_id_, q.id + 1);
}

void Scheduler::record_response(const Query& q, const QueryResult&, double now) {
  const auto it = std::find_if(in_flight_.begin(), in_flight_.end(), [&](const Query& f) { return f.id == q.id; });
  if (it == in_flight_.end() || it->account != q.account || it->endpoint != q.endpoint)
    throw DataError("response for query " + std::to_string(q.id) + " that was not issued");
  if (now < it->issued_at) throw DataError("response precedes its query");
  auto& log = usage_log_[idx(q.endpoint)];
  if (!log.empty() && now < log.back()) throw DataError("responses must be recorded in time order");
  in_flight_.erase(it);
  busy_[q.account][idx(q.endpoint)] = false;
  accounts_[q.account].last_queried[idx(q.endpoint)] = now;
  log.push_back(now);
}

std::optional<double> Scheduler::next_change(double now) const {
  std::optional<double> best;
  const auto consider = [&](double t) {
    if (t > now && (!best || t < *best)) best = t;
  };
  for (std::size_t ei = 0; ei < kEndpointCount; ++ei) {
    const auto e = static_cast<Endpoint>(ei);
    if (remaining(e, now) > 0) continue;
    const auto& log = usage_log_[ei];
    const double w = config_.limits[ei].window;
    const auto first_live = std::partition_point(log.begin(), log.end(), [&](double s) { return !(s + w > now); });
    if (first_live != log.end()) consider(*first_live + w);
  }
  if (remaining(Endpoint::tweets, now) > 0) {
    for (std::size_t a = 0; a < accounts_.size(); ++a) {
      const auto& last = accounts_[a].last_queried[kTweets];
      if (!busy_[a][kTweets] && last) consider(*last + config_.tweet_requery_interval);
    }
  }
  return best;
}

std::vector<AccountState> initial_accounts(const World& world) {
  std::vector<AccountState> out;
  for (const auto& a : world.accounts) out.push_back({a.account_id, a.is_seed, {}});
  return out;
}

World world_from_cohort(const corpus::Cohort& cohort) {
  const auto& w = cohort.window();
  const double days =
      static_cast<double>(w.last.next().start_seconds() - w.first.start_seconds()) / kDay;
  World out;
  for (std::size_t a = 0; a < cohort.account_count(); ++a)
    out.accounts.push_back(
        {cohort.account_id(a), cohort.is_seed(a), static_cast<double>(cohort.tweets_of(a).size()) / days});
  return out;
}

World synthetic_world(std::size_t n_accounts, std::size_t n_seeds, std::uint64_t seed) {
  if (n_seeds > n_accounts) throw ConfigError("more seeds than accounts");
  Rng rng(derive_seed(seed, "collector", "world"));
  World out;
  for (std::size_t i = 0; i < n_accounts; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "acct%06zu", i);
    out.accounts.push_back({id, i < n_seeds, 2.0 * std::exp(rng.normal())});
  }
  return out;
}

MockTransport::MockTransport(const World& world, std::uint64_t seed, std::uint64_t fetch_ceiling)
    : world_(world), seed_(seed), ceiling_(fetch_ceiling), last_fetch_(world.accounts.size(), -30 * kDay) {}

QueryResult MockTransport::fetch(const Query& q, double now) {
  if (q.endpoint != Endpoint::tweets) return {};
  Rng rng(derive_seed(seed_, "collector", "fetch", q.id));
  const double mean = world_.accounts[q.account].tweets_per_day * (now - last_fetch_[q.account]) / kDay;
  last_fetch_[q.account] = now;
  return {std::min<std::uint64_t>(ceiling_, rng.poisson(std::max(0.0, mean)))};
}

SimulationResult simulate(const World& world, const SimulationConfig& config,
                          const std::function<void(const TraceEvent&)>& sink) {
  if (config.latency < 0) throw ConfigError("latency must be non-negative");
  SimulationResult out{{}, {}, {}, Scheduler(initial_accounts(world), config.scheduler)};
  auto& sched = out.final_state;
  MockTransport transport(world, config.seed, config.fetch_ceiling);
  using Pending = std::pair<double, Query>;
  const auto later = [](const Pending& a, const Pending& b) {
    return a.first != b.first ? a.first > b.first : a.second.id > b.second.id;
  };
  std::priority_queue<Pending, std::vector<Pending>, decltype(later)> pending(later);

  double now = 0.0;
  while (now < config.duration) {
    while (!pending.empty() && pending.top().first <= now) {
      const auto [due, q] = pending.top();
      pending.pop();
      const auto result = transport.fetch(q, due);
      sched.record_response(q, result, due);
      out.trace.push_back({due, q.account, q.endpoint, Action::response, q.id, result.fetched});
      if (sink) sink(out.trace.back());
    }
    auto batch = sched.next_batch(now);
    if (!batch.empty()) {
      for (const auto& q : batch) {
        out.trace.push_back({now, q.account, q.endpoint, Action::issue, q.id, 0});
        pending.push({now + config.latency, q});
      }
      out.batches.push_back(std::move(batch));
      continue;
    }
    auto next = sched.next_change(now);
    if (!pending.empty() && (!next || pending.top().first < *next)) next = pending.top().first;
    if (!next) break;
    now = *next;
  }
  out.coverage = scan_trace(out.trace, world, config);
  return out;
}

CoverageReport scan_trace(const std::vector<TraceEvent>& trace, const World& world, const SimulationConfig& config) {
  const std::size_t n = world.accounts.size();
  CoverageReport r;
  r.queries.assign(n, {0, 0, 0});
  std::array<std::vector<double>, kEndpointCount> issues;
  std::vector<std::vector<double>> tweet_issues(n);
  for (const auto& ev : trace) {
    if (ev.action == Action::response) {
      r.fetched += ev.fetched;
      continue;
    }
    issues[idx(ev.endpoint)].push_back(ev.t);
    ++r.queries[ev.account][idx(ev.endpoint)];
    if (ev.endpoint == Endpoint::tweets) tweet_issues[ev.account].push_back(ev.t);
  }
  for (std::size_t e = 0; e < kEndpointCount; ++e) {
    auto& ts = issues[e];
    std::sort(ts.begin(), ts.end());
    const auto& lim = config.scheduler.limits[e];
    // Every maximal window starts at some issue instant.
    std::size_t j = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (j < i) j = i;
      while (j < ts.size() && ts[j] < ts[i] + lim.window) ++j;
      if (j - i > lim.capacity) ++r.limit_violations;
    }
  }
  std::size_t n_seeds = 0;
  for (const auto& a : world.accounts) n_seeds += a.is_seed ? 1 : 0;
  const auto& tl = config.scheduler.limits[kTweets];
  r.seed_staleness_ceiling = config.latency + config.scheduler.tweet_requery_interval +
                             std::ceil(static_cast<double>(std::max<std::size_t>(n_seeds, 1)) /
                                       static_cast<double>(tl.capacity)) *
                                 tl.window;
  r.max_tweet_staleness.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& ts = tweet_issues[a];
    double prev = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i > 0 && ts[i - 1] + config.scheduler.tweet_requery_interval > ts[i]) ++r.requery_violations;
      worst = std::max(worst, ts[i] - prev);
      prev = ts[i];
    }
    worst = std::max(worst, config.duration - prev);
    r.max_tweet_staleness[a] = worst;
    if (world.accounts[a].is_seed) r.max_seed_staleness = std::max(r.max_seed_staleness, worst);
  }
  r.priority_violations = priority_violations(trace, world, config);
  return r;
}

std::uint64_t priority_violations(const std::vector<TraceEvent>& trace, const World& world,
                                  const SimulationConfig& config) {
  const std::size_t n = world.accounts.size();
  std::vector<std::size_t> seeds;
  for (std::size_t a = 0; a < n; ++a)
    if (world.accounts[a].is_seed) seeds.push_back(a);
  std::vector<std::array<bool, kEndpointCount>> busy(n, {false, false, false});
  std::vector<std::optional<double>> last_tweets(n);
  std::uint64_t violations = 0;
  for (const auto& ev : trace) {
    const auto e = idx(ev.endpoint);
    if (ev.action == Action::response) {
      busy[ev.account][e] = false;
      if (e == kTweets) last_tweets[ev.account] = ev.t;
      continue;
    }
    if (!world.accounts[ev.account].is_seed) {
      for (const auto s : seeds) {
        const bool ready = e != kTweets || !last_tweets[s] ||
                           *last_tweets[s] + config.scheduler.tweet_requery_interval <= ev.t;
        if (!busy[s][e] && ready) {
          ++violations;
          break;
        }
      }
    }
    busy[ev.account][e] = true;
  }
  return violations;
}

Scheduler replay(const std::vector<TraceEvent>& trace, const World& world, const SchedulerConfig& config) {
  Scheduler s(initial_accounts(world), config);
  for (const auto& ev : trace) {
    const Query q{ev.query, ev.account, ev.endpoint, ev.t};
    if (ev.action == Action::issue) {
      s.issue(q);
    } else {
      s.record_response(q, {ev.fetched}, ev.t);
    }
  }
  return s;
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace, const World& world) {
  std::string out;
  for (const auto& ev : trace) {
    nlohmann::ordered_json j;
    j["t"] = ev.t;
    j["account"] = world.accounts[ev.account].account_id;
    j["endpoint"] = to_string(ev.endpoint);
    j["action"] = ev.action == Action::issue ? "issue" : "response";
    j["query"] = ev.query;
    if (ev.action == Action::response) j["fetched"] = ev.fetched;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace fluscope::collector
