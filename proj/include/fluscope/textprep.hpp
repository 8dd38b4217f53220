#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace fluscope::textprep {

/// True for the token separators: space, tab, LF, CR and . , ; ' : " ( ) ? ! / backslash.
constexpr bool is_delimiter(char c) {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r':
    case '.': case ',': case ';': case '\'': case ':':
    case '"': case '(': case ')': case '?': case '!':
    case '/': case '\\':
      return true;
    default:
      return false;
  }
}

/// Splits on delimiters; delimiters and empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters.
/// Other code points pass through unchanged.
std::string to_lower(std::string_view utf8);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t char_count(std::string_view utf8);

/// Porter (1980) stemmer, all five steps. Expects a lowercase token; tokens
/// containing non-ASCII bytes are returned unchanged.
std::string stem(std::string_view token);

class StopList {
 public:
  StopList() = default;
  explicit StopList(std::vector<std::string> words);

  /// One lowercase word per line; blank lines and '#' comments are ignored.
  static StopList from_file(const std::filesystem::path& path);
  /// The stopwords.txt shipped in data/.
  static StopList bundled();

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct StemmedDoc {
  std::vector<std::string> stems;
  std::size_t source_char_count = 0;
};

/// tokenize -> lowercase -> drop stop words -> stem.
StemmedDoc preprocess(std::string_view text, const StopList& stoplist);

}  // namespace fluscope::textprep
