#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fluscope {

enum class Label : std::uint8_t { not_sick = 0, sick = 1 };

constexpr bool is_sick(Label l) { return l == Label::sick; }
constexpr Label flipped(Label l) { return l == Label::sick ? Label::not_sick : Label::sick; }
std::string_view to_string(Label l);
Label parse_label(std::string_view s);

/// Malformed or inconsistent input data (bad file lines, dangling references).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, hyperparameters or call arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic cannot be computed from the available observations.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calendar month in UTC.
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  /// Parses "YYYY-MM". Throws DataError.
  static YearMonth parse(std::string_view s);
  static YearMonth from_index(int index);
  static YearMonth of_timestamp(std::int64_t unix_seconds);

  int index() const { return year * 12 + (month - 1); }
  YearMonth next() const { return from_index(index() + 1); }
  std::int64_t start_seconds() const;
  std::string str() const;
};

/// Inclusive range of calendar months.
struct StudyWindow {
  YearMonth first{2012, 9};
  YearMonth last{2013, 4};

  bool operator==(const StudyWindow&) const = default;

  std::size_t size() const { return static_cast<std::size_t>(last.index() - first.index() + 1); }
  bool contains(YearMonth m) const { return first <= m && m <= last; }
  bool contains_timestamp(std::int64_t t) const;
  /// Position of `m` inside the window; `m` must be contained.
  std::size_t offset(YearMonth m) const { return static_cast<std::size_t>(m.index() - first.index()); }
  std::vector<YearMonth> months() const;
  std::string str() const { return first.str() + ":" + last.str(); }
  static StudyWindow parse(std::string_view s);  // "YYYY-MM:YYYY-MM"
};

/// Parses "YYYY-MM-DDThh:mm:ssZ" into seconds since the Unix epoch. Throws DataError.
std::int64_t parse_timestamp(std::string_view s);
std::string format_timestamp(std::int64_t unix_seconds);

}  // namespace fluscope
