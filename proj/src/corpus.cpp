#include "fluscope/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "fluscope/textprep.hpp"

namespace fluscope::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Direction d) { return d == Direction::followers ? "followers" : "friends"; }

std::string_view to_string(ZeroTweetSickPolicy p) {
  return p == ZeroTweetSickPolicy::keep_sick ? "keep_sick" : "relabel_control";
}

ZeroTweetSickPolicy parse_zero_tweet_policy(std::string_view s) {
  if (s == "keep_sick") return ZeroTweetSickPolicy::keep_sick;
  if (s == "relabel_control") return ZeroTweetSickPolicy::relabel_control;
  throw ConfigError("zero_tweet_sick_policy must be keep_sick or relabel_control, got '" + std::string(s) + "'");
}

namespace {

std::string annotation_key(std::string_view user, YearMonth m) { return std::string(user) + "@" + m.str(); }

}  // namespace

Cohort::Cohort(StudyWindow window, std::vector<UserRecord> users, std::vector<TweetRecord> tweets,
               std::vector<EdgeRecord> edges, std::vector<AnnotationRecord> annotations)
    : window_(window),
      users_(std::move(users)),
      tweets_(std::move(tweets)),
      edges_(std::move(edges)),
      annotations_(std::move(annotations)) {
  if (window_.last < window_.first) throw DataError("study window ends before it starts");

  for (std::size_t i = 0; i < users_.size(); ++i) {
    const auto& u = users_[i];
    if (u.user_id.empty()) throw DataError("user " + std::to_string(i) + " has an empty user_id");
    if (!account_index_.emplace(u.user_id, account_ids_.size()).second)
      throw DataError("duplicate user_id '" + u.user_id + "'");
    account_ids_.push_back(u.user_id);
    if (u.diagnosed_month) {
      if (!u.is_seed) throw DataError("non-seed user '" + u.user_id + "' carries a diagnosis");
      if (!window_.contains(*u.diagnosed_month))
        throw DataError("user '" + u.user_id + "' diagnosed outside the study window (" +
                        u.diagnosed_month->str() + ")");
    }
    if (u.is_seed) seeds_.push_back(i);
  }

  // Periphery accounts appear only in edges; they are appended in sorted order.
  std::vector<std::string> periphery;
  for (const auto& e : edges_) {
    if (e.follower_id.empty() || e.followee_id.empty()) throw DataError("edge with an empty endpoint");
    if (e.follower_id == e.followee_id) throw DataError("self-edge on '" + e.follower_id + "'");
    for (const auto* id : {&e.follower_id, &e.followee_id})
      if (!account_index_.contains(*id)) periphery.push_back(*id);
  }
  std::sort(periphery.begin(), periphery.end());
  periphery.erase(std::unique(periphery.begin(), periphery.end()), periphery.end());
  for (auto& id : periphery) {
    account_index_.emplace(id, account_ids_.size());
    account_ids_.push_back(std::move(id));
  }

  const std::size_t n = account_ids_.size();
  followers_.resize(n);
  friends_.resize(n);
  for (const auto& e : edges_) {
    const auto from = account_index_.at(e.follower_id);
    const auto to = account_index_.at(e.followee_id);
    followers_[to].push_back(from);
    friends_[from].push_back(to);
  }
  for (auto* adj : {&followers_, &friends_}) {
    for (auto& list : *adj) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }

  tweets_by_account_.resize(n);
  for (std::size_t i = 0; i < tweets_.size(); ++i) {
    const auto& t = tweets_[i];
    if (t.user_id.empty()) throw DataError("tweet " + std::to_string(i) + " has an empty user_id");
    const auto it = account_index_.find(t.user_id);
    if (it == account_index_.end())
      throw DataError("tweet " + std::to_string(i) + " authored by unknown account '" + t.user_id + "'");
    if (!window_.contains_timestamp(t.timestamp))
      throw DataError("tweet " + std::to_string(i) + " at " + format_timestamp(t.timestamp) +
                      " lies outside the study window " + window_.str());
    tweets_by_account_[it->second].push_back(i);
  }
  for (auto& list : tweets_by_account_) {
    std::stable_sort(list.begin(), list.end(),
                     [&](std::size_t a, std::size_t b) { return tweets_[a].timestamp < tweets_[b].timestamp; });
  }

  for (const auto& a : annotations_) {
    const auto account = find_account(a.user_id);
    if (!account || !is_seed(*account))
      throw DataError("annotation references unknown seed user '" + a.user_id + "'");
    if (!window_.contains(a.month))
      throw DataError("annotation for " + a.user_id + " references month " + a.month.str() +
                      " outside the study window");
    if (a.sick_tweet_count < 0) throw DataError("annotation for " + a.user_id + " has a negative count");
    const auto available = tweets_of(*account, a.month).size();
    if (static_cast<std::size_t>(a.sick_tweet_count) > available)
      throw DataError("annotation for " + a.user_id + "@" + a.month.str() + " rates " +
                      std::to_string(a.sick_tweet_count) + " tweets sick but only " + std::to_string(available) +
                      " were posted");
    if (!annotation_index_.emplace(annotation_key(a.user_id, a.month), a.sick_tweet_count).second)
      throw DataError("duplicate annotation for " + a.user_id + "@" + a.month.str());
  }
}

std::optional<std::size_t> Cohort::find_account(std::string_view id) const {
  const auto it = account_index_.find(std::string(id));
  if (it == account_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Cohort::user_record(std::size_t account) const {
  if (account < users_.size()) return account;
  return std::nullopt;
}

bool Cohort::is_seed(std::size_t account) const { return account < users_.size() && users_[account].is_seed; }

std::span<const std::size_t> Cohort::tweets_of(std::size_t account, YearMonth month) const {
  const auto& list = tweets_by_account_[account];
  const auto begin = month.start_seconds();
  const auto end = month.next().start_seconds();
  const auto lo = std::lower_bound(list.begin(), list.end(), begin,
                                   [&](std::size_t i, std::int64_t t) { return tweets_[i].timestamp < t; });
  const auto hi = std::lower_bound(lo, list.end(), end,
                                   [&](std::size_t i, std::int64_t t) { return tweets_[i].timestamp < t; });
  return {list.data() + (lo - list.begin()), static_cast<std::size_t>(hi - lo)};
}

std::optional<int> Cohort::annotation_for(std::string_view user_id, YearMonth month) const {
  const auto it = annotation_index_.find(annotation_key(user_id, month));
  if (it == annotation_index_.end()) return std::nullopt;
  return it->second;
}

bool Cohort::operator==(const Cohort& o) const {
  return window_ == o.window_ && users_ == o.users_ && tweets_ == o.tweets_ && edges_ == o.edges_ &&
         annotations_ == o.annotations_;
}

// ---------------------------------------------------------------------------
// JSONL I/O

namespace {

class LineError {
 public:
  LineError(const std::filesystem::path& file, std::size_t line) : file_(file), line_(line) {}
  [[noreturn]] void raise(const std::string& what) const {
    throw DataError(file_.string() + ":" + std::to_string(line_) + ": " + what);
  }

 private:
  const std::filesystem::path& file_;
  std::size_t line_;
};

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, const LineError&)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const LineError where(path, number);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      where.raise(std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) where.raise("expected a JSON object");
    try {
      fn(obj, where);
    } catch (const json::exception& e) {
      where.raise(e.what());
    } catch (const DataError& e) {
      where.raise(e.what());
    }
  }
}

const json& field(const json& obj, const char* name, const LineError& where) {
  const auto it = obj.find(name);
  if (it == obj.end()) where.raise(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& obj, const char* name, const LineError& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_string()) where.raise(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::vector<UserRecord> read_users(const std::filesystem::path& path) {
  std::vector<UserRecord> out;
  for_each_json_line(path, [&](const json& o, const LineError& where) {
    UserRecord u;
    u.user_id = string_field(o, "user_id", where);
    const auto& dm = field(o, "diagnosed_month", where);
    if (!dm.is_null()) {
      if (!dm.is_string()) where.raise("diagnosed_month must be \"YYYY-MM\" or null");
      u.diagnosed_month = YearMonth::parse(dm.get<std::string>());
    }
    const auto& seed = field(o, "is_seed", where);
    if (!seed.is_boolean()) where.raise("is_seed must be a boolean");
    u.is_seed = seed.get<bool>();
    out.push_back(std::move(u));
  });
  return out;
}

std::vector<TweetRecord> read_tweets(const std::filesystem::path& path) {
  std::vector<TweetRecord> out;
  for_each_json_line(path, [&](const json& o, const LineError& where) {
    TweetRecord t;
    t.user_id = string_field(o, "user_id", where);
    t.timestamp = parse_timestamp(string_field(o, "timestamp", where));
    t.text = string_field(o, "text", where);
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<EdgeRecord> read_edges(const std::filesystem::path& path) {
  std::vector<EdgeRecord> out;
  for_each_json_line(path, [&](const json& o, const LineError& where) {
    out.push_back({string_field(o, "follower_id", where), string_field(o, "followee_id", where)});
  });
  return out;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::vector<AnnotationRecord> out;
  for_each_json_line(path, [&](const json& o, const LineError& where) {
    AnnotationRecord a;
    a.user_id = string_field(o, "user_id", where);
    a.month = YearMonth::parse(string_field(o, "month", where));
    const auto& c = field(o, "sick_tweet_count", where);
    if (!c.is_number_integer()) where.raise("sick_tweet_count must be an integer");
    a.sick_tweet_count = c.get<int>();
    if (a.sick_tweet_count < 0) where.raise("sick_tweet_count must be non-negative");
    out.push_back(std::move(a));
  });
  return out;
}

StudyWindow infer_window(const std::vector<UserRecord>& users, const std::vector<TweetRecord>& tweets) {
  std::optional<YearMonth> lo, hi;
  auto widen = [&](YearMonth m) {
    if (!lo || m < *lo) lo = m;
    if (!hi || *hi < m) hi = m;
  };
  for (const auto& t : tweets) widen(YearMonth::of_timestamp(t.timestamp));
  for (const auto& u : users)
    if (u.diagnosed_month) widen(*u.diagnosed_month);
  if (!lo) throw DataError("cannot infer a study window from a cohort without tweets or diagnoses");
  return {*lo, *hi};
}

template <class Fn>
void write_lines(const std::filesystem::path& path, std::size_t n, Fn&& make) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < n; ++i) out << make(i).dump() << '\n';
}

}  // namespace

CohortPaths CohortPaths::in_directory(const std::filesystem::path& dir) {
  CohortPaths p{dir / "users.jsonl", dir / "tweets.jsonl", dir / "edges.jsonl", std::nullopt, std::nullopt};
  if (std::filesystem::exists(dir / "annotations.jsonl")) p.annotations = dir / "annotations.jsonl";
  if (std::filesystem::exists(dir / "manifest.json")) p.manifest = dir / "manifest.json";
  return p;
}

Cohort load_cohort(const CohortPaths& paths, std::optional<StudyWindow> window) {
  auto users = read_users(paths.users);
  auto tweets = read_tweets(paths.tweets);
  auto edges = read_edges(paths.edges);
  std::vector<AnnotationRecord> annotations;
  if (paths.annotations) annotations = read_annotations(*paths.annotations);

  if (!window && paths.manifest) {
    std::ifstream in(*paths.manifest);
    try {
      const auto m = json::parse(in);
      if (m.contains("study_window")) window = StudyWindow::parse(m.at("study_window").get<std::string>());
    } catch (const json::exception& e) {
      throw DataError(paths.manifest->string() + ": " + e.what());
    }
  }
  if (!window) window = infer_window(users, tweets);
  return Cohort(*window, std::move(users), std::move(tweets), std::move(edges), std::move(annotations));
}

Cohort load_cohort(const std::filesystem::path& dir, std::optional<StudyWindow> window) {
  return load_cohort(CohortPaths::in_directory(dir), window);
}

void save_cohort(const Cohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& users = cohort.users();
  write_lines(dir / "users.jsonl", users.size(), [&](std::size_t i) {
    ordered_json o;
    o["user_id"] = users[i].user_id;
    o["diagnosed_month"] = users[i].diagnosed_month ? ordered_json(users[i].diagnosed_month->str()) : nullptr;
    o["is_seed"] = users[i].is_seed;
    return o;
  });
  const auto& tweets = cohort.tweets();
  write_lines(dir / "tweets.jsonl", tweets.size(), [&](std::size_t i) {
    ordered_json o;
    o["user_id"] = tweets[i].user_id;
    o["timestamp"] = format_timestamp(tweets[i].timestamp);
    o["text"] = tweets[i].text;
    return o;
  });
  const auto& edges = cohort.edges();
  write_lines(dir / "edges.jsonl", edges.size(), [&](std::size_t i) {
    ordered_json o;
    o["follower_id"] = edges[i].follower_id;
    o["followee_id"] = edges[i].followee_id;
    return o;
  });
  const auto& ann = cohort.annotations();
  write_lines(dir / "annotations.jsonl", ann.size(), [&](std::size_t i) {
    ordered_json o;
    o["user_id"] = ann[i].user_id;
    o["month"] = ann[i].month.str();
    o["sick_tweet_count"] = ann[i].sick_tweet_count;
    return o;
  });
  ordered_json manifest;
  manifest["format"] = "fluscope-cohort";
  manifest["version"] = 1;
  manifest["study_window"] = cohort.window().str();
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path, const Cohort& cohort) {
  auto records = read_annotations(path);
  // Re-run the cohort's cross-checks against the annotated user-months.
  Cohort checked(cohort.window(), cohort.users(), cohort.tweets(), cohort.edges(), records);
  return records;
}

std::vector<UserMonth> partition_user_months(const Cohort& cohort, ZeroTweetSickPolicy policy) {
  std::vector<UserMonth> out;
  const auto months = cohort.window().months();
  out.reserve(cohort.seed_accounts().size() * months.size());
  for (const auto account : cohort.seed_accounts()) {
    const auto& user = cohort.users()[account];
    for (const auto m : months) {
      UserMonth um;
      um.user_id = user.user_id;
      um.month = m;
      const auto refs = cohort.tweets_of(account, m);
      um.tweet_refs.assign(refs.begin(), refs.end());
      um.label = (user.diagnosed_month && *user.diagnosed_month == m) ? Label::sick : Label::not_sick;
      if (um.label == Label::sick && um.tweet_refs.empty() && policy == ZeroTweetSickPolicy::relabel_control)
        um.label = Label::not_sick;
      out.push_back(std::move(um));
    }
  }
  return out;
}

NetworkStream assemble_network_stream(const Cohort& cohort, std::string_view user_id, YearMonth month,
                                      Direction direction) {
  const auto account = cohort.find_account(user_id);
  if (!account) throw DataError("unknown user '" + std::string(user_id) + "'");
  NetworkStream stream;
  const auto linked = direction == Direction::followers ? cohort.followers_of(*account) : cohort.friends_of(*account);
  for (const auto other : linked) {
    for (const auto t : cohort.tweets_of(other, month)) {
      const auto& text = cohort.tweets()[t].text;
      stream.tweet_refs.push_back(t);
      stream.texts.emplace_back(text);
      stream.char_count += textprep::char_count(text);
    }
  }
  return stream;
}

}  // namespace fluscope::corpus
