#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fluscope/rng.hpp"
#include "fluscope/textprep.hpp"

using namespace fluscope;
using namespace fluscope::textprep;

namespace {

std::string random_text(Rng& rng, std::size_t len) {
  static const std::string alphabet = "abcXYZ \t\n.,;':\"()?!/\\-_#@09";
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

}  // namespace

TEST_SUITE("textprep") {

TEST_CASE("tokenize splits on the delimiter list") {
  CHECK(tokenize("got the flu, again!") == std::vector<std::string>{"got", "the", "flu", "again"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a/b\\c(d)e\"f'g:h;i?j") ==
        std::vector<std::string>{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  CHECK(tokenize("#flu-shot @doc") == std::vector<std::string>{"#flu-shot", "@doc"});
}

TEST_CASE("tokenize properties over fuzzed strings") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto text = random_text(rng, rng.below(60));
    const auto tokens = tokenize(text);
    std::string joined;
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      for (char c : t) CHECK_FALSE(is_delimiter(c));
      joined += (joined.empty() ? "" : " ") + t;
    }
    CHECK(tokenize(joined) == tokens);
  }
}

TEST_CASE("lowercasing and character counts") {
  CHECK(to_lower("FLU Fever") == "flu fever");
  CHECK(to_lower("ÉCOLE ΓΡΙΠΗ ГРИПП") == "école γριπη грипп");
  CHECK(char_count("ab") == 2);
  CHECK(char_count("é") == 1);
  CHECK(char_count("грипп") == 5);
}

TEST_CASE("stem examples") {
  CHECK(stem("medicine") == "medicin");
  CHECK(stem("flu") == "flu");
  CHECK(stem("caresses") == "caress");
  CHECK(stem("relational") == "relat");
  CHECK(stem("ponies") == "poni");
  CHECK(stem("sick") == "sick");
  CHECK(stem("got") == "got");
  CHECK(stem("awful") == "aw");
  CHECK(stem("influenza") == "influenza");
  CHECK(stem("fever") == "fever");
  CHECK(stem("coughing") == "cough");
  CHECK(stem("grippé") == "grippé");
}

TEST_CASE("stem matches the golden vocabulary") {
  std::ifstream in(std::string(FLUSCOPE_TEST_DATA) + "/porter_golden.tsv");
  REQUIRE(in);
  std::string line;
  std::size_t words = 0, mismatches = 0;
  std::vector<std::string> outputs;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const auto word = line.substr(0, tab), expected = line.substr(tab + 1);
    const auto got = stem(word);
    if (got != expected) {
      if (++mismatches <= 10) MESSAGE(word << " -> " << got << " expected " << expected);
    }
    outputs.push_back(got);
    ++words;
  }
  CHECK(words >= 10000);
  CHECK(mismatches == 0);

  std::size_t stable = 0;
  for (const auto& s : outputs) stable += stem(s) == s;
  MESSAGE("stem idempotent on " << stable << " of " << outputs.size() << " golden outputs");
}

TEST_CASE("preprocess") {
  const StopList stop({"the", "is"});
  CHECK(preprocess("The FLU is awful", stop).stems == std::vector<std::string>{"flu", "aw"});
  CHECK(preprocess("the is THE", stop).stems.empty());
  CHECK(preprocess("I got sick", StopList({"i"})).stems == std::vector<std::string>{"got", "sick"});
  const auto doc = preprocess("Févers!", StopList{});
  CHECK(doc.source_char_count == 7);
}

TEST_CASE("preprocess ignores trailing delimiters and is deterministic") {
  const auto stop = StopList::bundled();
  CHECK(stop.size() > 50);
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const auto text = random_text(rng, rng.below(50));
    const auto a = preprocess(text, stop).stems;
    CHECK(preprocess(text + " ..!?", stop).stems == a);
    CHECK(preprocess(text, stop).stems == a);
  }
}

TEST_CASE("stop list file skips comments and blanks") {
  const auto path = std::filesystem::temp_directory_path() / "fluscope_stop_test.txt";
  std::ofstream(path) << "# header\n\nthe\n  and \n";
  const auto s = StopList::from_file(path);
  CHECK(s.contains("the"));
  CHECK(s.contains("and"));
  CHECK(s.size() == 2);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
