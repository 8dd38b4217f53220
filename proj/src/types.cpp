#include "fluscope/types.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace fluscope {

namespace {

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  if (pos + len > s.size()) throw DataError("truncated date/time: '" + std::string(whole) + "'");
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') throw DataError("expected digit in '" + std::string(whole) + "'");
    value = value * 10 + (s[i] - '0');
  }
  return value;
}

void expect_char(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw DataError("expected '" + std::string(1, c) + "' at offset " + std::to_string(pos) + " in '" +
                    std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Label l) { return l == Label::sick ? "sick" : "not_sick"; }

Label parse_label(std::string_view s) {
  if (s == "sick" || s == "1") return Label::sick;
  if (s == "not_sick" || s == "0") return Label::not_sick;
  throw DataError("unknown label '" + std::string(s) + "'");
}

YearMonth YearMonth::parse(std::string_view s) {
  if (s.size() != 7) throw DataError("expected YYYY-MM, got '" + std::string(s) + "'");
  YearMonth ym{parse_fixed(s, 0, 4, s), 0};
  expect_char(s, 4, '-');
  ym.month = parse_fixed(s, 5, 2, s);
  if (ym.month < 1 || ym.month > 12) throw DataError("month out of range in '" + std::string(s) + "'");
  return ym;
}

YearMonth YearMonth::from_index(int index) {
  int year = index >= 0 ? index / 12 : (index - 11) / 12;
  return {year, index - year * 12 + 1};
}

YearMonth YearMonth::of_timestamp(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_days day = floor<days>(sys_seconds{seconds{unix_seconds}});
  const year_month_day ymd{day};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

std::int64_t YearMonth::start_seconds() const {
  using namespace std::chrono;
  const sys_days day{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / 1};
  return duration_cast<seconds>(day.time_since_epoch()).count();
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

bool StudyWindow::contains_timestamp(std::int64_t t) const {
  return t >= first.start_seconds() && t < last.next().start_seconds();
}

std::vector<YearMonth> StudyWindow::months() const {
  std::vector<YearMonth> out;
  for (int i = first.index(); i <= last.index(); ++i) out.push_back(YearMonth::from_index(i));
  return out;
}

StudyWindow StudyWindow::parse(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw ConfigError("study window must be YYYY-MM:YYYY-MM");
  StudyWindow w{YearMonth::parse(s.substr(0, colon)), YearMonth::parse(s.substr(colon + 1))};
  if (w.last < w.first) throw ConfigError("study window ends before it starts: " + std::string(s));
  return w;
}

std::int64_t parse_timestamp(std::string_view s) {
  // YYYY-MM-DDThh:mm:ssZ
  if (s.size() != 20) throw DataError("expected YYYY-MM-DDThh:mm:ssZ, got '" + std::string(s) + "'");
  const int y = parse_fixed(s, 0, 4, s);
  expect_char(s, 4, '-');
  const int mo = parse_fixed(s, 5, 2, s);
  expect_char(s, 7, '-');
  const int d = parse_fixed(s, 8, 2, s);
  expect_char(s, 10, 'T');
  const int hh = parse_fixed(s, 11, 2, s);
  expect_char(s, 13, ':');
  const int mm = parse_fixed(s, 14, 2, s);
  expect_char(s, 16, ':');
  const int ss = parse_fixed(s, 17, 2, s);
  expect_char(s, 19, 'Z');

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59)
    throw DataError("invalid calendar date/time '" + std::string(s) + "'");
  return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count() + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{unix_seconds}};
  const sys_days day = floor<days>(tp);
  const year_month_day ymd{day};
  const auto rem = (tp - day).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

}  // namespace fluscope
