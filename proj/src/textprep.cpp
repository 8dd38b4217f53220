#include "fluscope/textprep.hpp"

#include <array>
#include <fstream>

#include "fluscope/types.hpp"

namespace fluscope::textprep {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_delimiter(text[i])) {
      if (i > start) tokens.emplace_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return tokens;
}

namespace {

char32_t lower_code_point(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    // Latin Extended-A mostly alternates upper/lower; the exceptions are the
    // odd-aligned runs 0x139..0x148 and 0x179..0x17E.
    const bool odd_run = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (c == 0x178) return 0xFF;
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    if (odd_run) return (c % 2 == 1) ? c + 1 : c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;  // Greek
  if (c >= 0x410 && c <= 0x42F) return c + 32;                // Cyrillic basic
  if (c >= 0x400 && c <= 0x40F) return c + 80;                // Cyrillic Ѐ..Џ
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(static_cast<char>(b0 >= 'A' && b0 <= 'Z' ? b0 + 32 : b0));
      ++i;
      continue;
    }
    std::size_t len = (b0 >= 0xF0) ? 4 : (b0 >= 0xE0) ? 3 : (b0 >= 0xC0) ? 2 : 1;
    if (len == 1 || i + len > s.size()) {  // stray or truncated byte: copy verbatim
      out.push_back(s[i++]);
      continue;
    }
    char32_t c = b0 & (0x7F >> len);
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) valid = false;
      c = (c << 6) | (b & 0x3F);
    }
    if (!valid) {
      out.push_back(s[i++]);
      continue;
    }
    append_utf8(out, lower_code_point(c));
    i += len;
  }
  return out;
}

std::size_t char_count(std::string_view utf8) {
  std::size_t n = 0;
  for (unsigned char c : utf8)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Porter stemmer

namespace {

class Porter {
 public:
  explicit Porter(std::string_view word) : w_(word) {}

  std::string run() {
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5a();
    step5b();
    return w_;
  }

 private:
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  bool consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !consonant(i - 1);
      default:
        return true;
    }
  }

  // m in [C](VC)^m[V] over the first `len` characters.
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i)
      if (!consonant(i)) return true;
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 3) || consonant(len - 2) || !consonant(len - 1)) return false;
    const char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends(std::string_view suffix) const {
    return w_.size() >= suffix.size() && std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
  }

  void replace_tail(std::size_t suffix_len, std::string_view replacement) {
    w_.resize(w_.size() - suffix_len);
    w_.append(replacement);
  }

  // First rule whose suffix matches decides; its condition failing ends the step.
  template <std::size_t N, class Cond>
  void apply_rules(const std::array<Rule, N>& rules, Cond cond) {
    for (const auto& r : rules) {
      if (!ends(r.suffix)) continue;
      const std::size_t stem_len = w_.size() - r.suffix.size();
      if (cond(stem_len, r.suffix)) replace_tail(r.suffix.size(), r.replacement);
      return;
    }
  }

  void step1a() {
    if (ends("sses")) replace_tail(4, "ss");
    else if (ends("ies")) replace_tail(3, "i");
    else if (ends("ss")) return;
    else if (ends("s")) replace_tail(1, "");
  }

  void step1b() {
    if (ends("eed")) {
      if (measure(w_.size() - 3) > 0) replace_tail(3, "ee");
      return;
    }
    std::size_t cut = 0;
    if (ends("ed") && has_vowel(w_.size() - 2)) cut = 2;
    else if (ends("ing") && has_vowel(w_.size() - 3)) cut = 3;
    if (cut == 0) return;
    w_.resize(w_.size() - cut);

    if (ends("at")) replace_tail(2, "ate");
    else if (ends("bl")) replace_tail(2, "ble");
    else if (ends("iz")) replace_tail(2, "ize");
    else if (double_consonant(w_.size())) {
      const char c = w_.back();
      if (c != 'l' && c != 's' && c != 'z') w_.pop_back();
    } else if (measure(w_.size()) == 1 && cvc(w_.size())) {
      w_.push_back('e');
    }
  }

  void step1c() {
    if (ends("y") && has_vowel(w_.size() - 1)) w_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> rules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_rules(rules, [this](std::size_t len, std::string_view) { return measure(len) > 0; });
  }

  void step3() {
    static constexpr std::array<Rule, 7> rules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_rules(rules, [this](std::size_t len, std::string_view) { return measure(len) > 0; });
  }

  void step4() {
    static constexpr std::array<Rule, 19> rules{{
        {"al", ""},   {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},   {"able", ""}, {"ible", ""},
        {"ant", ""},  {"ement", ""}, {"ment", ""}, {"ent", ""}, {"ion", ""},  {"ou", ""},   {"ism", ""},
        {"ate", ""},  {"iti", ""},  {"ous", ""},  {"ive", ""}, {"ize", ""},
    }};
    apply_rules(rules, [this](std::size_t len, std::string_view suffix) {
      if (measure(len) <= 1) return false;
      if (suffix == "ion") return len > 0 && (w_[len - 1] == 's' || w_[len - 1] == 't');
      return true;
    });
  }

  void step5a() {
    if (!ends("e")) return;
    const std::size_t len = w_.size() - 1;
    const int m = measure(len);
    if (m > 1 || (m == 1 && !cvc(len))) w_.pop_back();
  }

  void step5b() {
    if (measure(w_.size()) > 1 && double_consonant(w_.size()) && w_.back() == 'l') w_.pop_back();
  }

  std::string w_;
};

}  // namespace

std::string stem(std::string_view token) {
  if (token.empty()) return {};
  for (unsigned char c : token)
    if (c >= 0x80) return std::string(token);
  return Porter(token).run();
}

// ---------------------------------------------------------------------------

StopList::StopList(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(to_lower(w));
}

StopList StopList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop list " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(b, e - b + 1));
  }
  return StopList(std::move(words));
}

StopList StopList::bundled() { return from_file(std::filesystem::path(FLUSCOPE_DATA_DIR) / "stopwords.txt"); }

StemmedDoc preprocess(std::string_view text, const StopList& stoplist) {
  StemmedDoc doc;
  doc.source_char_count = char_count(text);
  for (const auto& token : tokenize(text)) {
    std::string lowered = to_lower(token);
    if (stoplist.contains(lowered)) continue;
    std::string s = stem(lowered);
    if (!s.empty()) doc.stems.push_back(std::move(s));
  }
  return doc;
}

}  // namespace fluscope::textprep
