#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fluscope/types.hpp"

namespace fluscope::corpus {

struct TweetRecord {
  std::string user_id;
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
  std::string text;

  bool operator==(const TweetRecord&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::optional<YearMonth> diagnosed_month;
  bool is_seed = false;

  bool operator==(const UserRecord&) const = default;
};

/// follower -> followee. The graph is one directional.
struct EdgeRecord {
  std::string follower_id;
  std::string followee_id;

  bool operator==(const EdgeRecord&) const = default;
};

/// Number of tweets a human rater judged to be about the user being sick.
struct AnnotationRecord {
  std::string user_id;
  YearMonth month;
  int sick_tweet_count = 0;

  bool operator==(const AnnotationRecord&) const = default;
};

enum class Direction { followers, friends };
std::string_view to_string(Direction d);

/// What to do with a diagnosed user who posted nothing in the diagnosed month.
enum class ZeroTweetSickPolicy { keep_sick, relabel_control };
std::string_view to_string(ZeroTweetSickPolicy p);
ZeroTweetSickPolicy parse_zero_tweet_policy(std::string_view s);

/// One seed user in one calendar month: the classification instance.
struct UserMonth {
  std::string user_id;
  YearMonth month;
  std::vector<std::size_t> tweet_refs;  // indices into Cohort::tweets()
  Label label = Label::not_sick;

  std::string id() const { return user_id + "@" + month.str(); }
};

/// Immutable, cross-indexed collection of users, tweets, edges and annotations.
/// Construction validates every invariant and throws DataError on violation.
/// Safe to share between threads once built.
class Cohort {
 public:
  Cohort(StudyWindow window, std::vector<UserRecord> users, std::vector<TweetRecord> tweets,
         std::vector<EdgeRecord> edges, std::vector<AnnotationRecord> annotations);

  const StudyWindow& window() const { return window_; }
  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<TweetRecord>& tweets() const { return tweets_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  const std::vector<AnnotationRecord>& annotations() const { return annotations_; }

  /// Accounts are the listed users followed by periphery ids that only occur in edges.
  std::size_t account_count() const { return account_ids_.size(); }
  const std::string& account_id(std::size_t account) const { return account_ids_[account]; }
  std::optional<std::size_t> find_account(std::string_view id) const;
  /// Index into users() when the account has a user record.
  std::optional<std::size_t> user_record(std::size_t account) const;
  bool is_seed(std::size_t account) const;

  /// Tweet indices of an account ordered by (timestamp, file order).
  std::span<const std::size_t> tweets_of(std::size_t account) const { return tweets_by_account_[account]; }
  /// Tweets of an account posted during `month`.
  std::span<const std::size_t> tweets_of(std::size_t account, YearMonth month) const;
  std::span<const std::size_t> followers_of(std::size_t account) const { return followers_[account]; }
  std::span<const std::size_t> friends_of(std::size_t account) const { return friends_[account]; }

  /// Seed users in file order, as account indices.
  const std::vector<std::size_t>& seed_accounts() const { return seeds_; }
  /// Annotated sick-tweet count for a user-month, or nullopt when not annotated.
  std::optional<int> annotation_for(std::string_view user_id, YearMonth month) const;

  bool operator==(const Cohort& other) const;

 private:
  StudyWindow window_;
  std::vector<UserRecord> users_;
  std::vector<TweetRecord> tweets_;
  std::vector<EdgeRecord> edges_;
  std::vector<AnnotationRecord> annotations_;

  std::vector<std::string> account_ids_;
  std::unordered_map<std::string, std::size_t> account_index_;
  std::vector<std::vector<std::size_t>> tweets_by_account_;
  std::vector<std::vector<std::size_t>> followers_;
  std::vector<std::vector<std::size_t>> friends_;
  std::vector<std::size_t> seeds_;
  std::unordered_map<std::string, int> annotation_index_;
};

struct CohortPaths {
  std::filesystem::path users;
  std::filesystem::path tweets;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> manifest;

  /// users.jsonl, tweets.jsonl, edges.jsonl and (if present) annotations.jsonl, manifest.json.
  static CohortPaths in_directory(const std::filesystem::path& dir);
};

/// Reads the JSONL files. The study window comes from `window`, else from the
/// manifest, else it is inferred as the month span of the tweets and diagnoses.
/// Errors name the file and 1-based line.
Cohort load_cohort(const CohortPaths& paths, std::optional<StudyWindow> window = std::nullopt);
Cohort load_cohort(const std::filesystem::path& dir, std::optional<StudyWindow> window = std::nullopt);

/// Writes users/tweets/edges/annotations JSONL and a manifest carrying the window.
void save_cohort(const Cohort& cohort, const std::filesystem::path& dir);

/// Parses an annotations file and validates every record against `cohort`.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path, const Cohort& cohort);

/// One instance per (seed user, window month), seed users in file order.
std::vector<UserMonth> partition_user_months(const Cohort& cohort,
                                             ZeroTweetSickPolicy policy = ZeroTweetSickPolicy::keep_sick);

struct NetworkStream {
  std::vector<std::size_t> tweet_refs;
  std::vector<std::string_view> texts;  // views into the cohort
  std::size_t char_count = 0;           // Unicode scalar values
};

/// All tweets posted during `month` by the user's followers or friends.
NetworkStream assemble_network_stream(const Cohort& cohort, std::string_view user_id, YearMonth month,
                                      Direction direction);

}  // namespace fluscope::corpus
