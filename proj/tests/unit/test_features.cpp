#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fluscope/features.hpp"
#include "fluscope/pipeline.hpp"
#include "fluscope/rng.hpp"
#include "fluscope/synthetic.hpp"
#include "oracles.hpp"

using namespace fluscope;
using namespace fluscope::features;
using textprep::StemmedDoc;

namespace {

StemmedDoc doc(std::vector<std::string> stems) {
  StemmedDoc d;
  std::size_t chars = 0;
  for (const auto& s : stems) chars += s.size() + 1;
  d.source_char_count = chars;
  d.stems = std::move(stems);
  return d;
}

std::vector<StemmedDoc> random_month(Rng& rng, const std::vector<std::string>& pool) {
  std::vector<StemmedDoc> docs(rng.below(5));
  for (auto& d : docs) {
    const auto len = rng.below(8);
    for (std::size_t i = 0; i < len; ++i) d.stems.push_back(pool[rng.below(pool.size())]);
    d.source_char_count = 10 * len;
  }
  return docs;
}

const std::vector<std::string> kPool{"flu", "fever", "sick", "cold", "cough", "influenza", "medicin",
                                     "got", "day", "work", "game", "lol", "rain", "coffe"};

}  // namespace

TEST_SUITE("features") {

TEST_CASE("expert keyword presence") {
  const auto ks = expert_keywords();
  CHECK(ks.keywords == std::vector<std::string>{"flu", "influenza", "sick", "cough", "cold", "medicin", "fever"});
  const std::vector<StemmedDoc> month{doc({"got", "the", "flu"})};
  const auto v = presence_vector(month, ks);
  CHECK(v.values == std::vector<double>{1, 0, 0, 0, 0, 0, 0});
  CHECK(v.schema_id == ks.schema_id());
  CHECK(presence_vector(std::vector<StemmedDoc>{}, ks).values == std::vector<double>(7, 0.0));
}

TEST_CASE("presence matches set membership and ignores tweet order") {
  Rng rng(31);
  const auto ks = expert_keywords();
  for (int i = 0; i < 500; ++i) {
    auto month = random_month(rng, kPool);
    std::set<std::string> seen;
    for (const auto& d : month) seen.insert(d.stems.begin(), d.stems.end());
    const auto v = presence_vector(month, ks);
    for (std::size_t k = 0; k < ks.keywords.size(); ++k) CHECK(v.values[k] == (seen.count(ks.keywords[k]) ? 1.0 : 0.0));
    rng.shuffle(month.begin(), month.end());
    CHECK(presence_vector(month, ks).values == v.values);
  }
}

TEST_CASE("vocabulary ordering") {
  const std::vector<StemmedDoc> a{doc({"a", "a", "b"})};
  CHECK(build_vocabulary(a, 2) == std::vector<std::string>{"a", "b"});
  const std::vector<StemmedDoc> tie{doc({"b", "a"})};
  CHECK(build_vocabulary(tie, 2) == std::vector<std::string>{"a", "b"});
  CHECK(build_vocabulary(tie, 1) == std::vector<std::string>{"a"});
}

TEST_CASE("vocabulary matches a count-sort oracle and the serial kernel") {
  Rng rng(37);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<StemmedDoc>> instances(20);
    std::vector<StemmedDoc> flat;
    BagCorpus bags;
    for (auto& inst : instances) {
      inst = random_month(rng, kPool);
      flat.insert(flat.end(), inst.begin(), inst.end());
      bags.add_instance(inst);
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& d : flat)
      for (const auto& s : d.stems) ++counts[s];
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.second > y.second; });
    const std::size_t max = 1 + rng.below(kPool.size());
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < std::min(max, sorted.size()); ++i) expected.push_back(sorted[i].first);
    CHECK(build_vocabulary(flat, max) == expected);

    std::vector<std::size_t> rows(instances.size());
    std::iota(rows.begin(), rows.end(), 0);
    const auto ids = build_vocabulary(bags, rows, max);
    CHECK(ids == serial::build_vocabulary(bags, rows, max));
    std::vector<std::string> terms;
    for (auto id : ids) terms.push_back(bags.lexicon.term(id));
    CHECK(terms == expected);
  }
}

TEST_CASE("information gain") {
  const std::vector<std::uint8_t> perfect{1, 1, 0, 0};
  const std::vector<Label> y{Label::sick, Label::sick, Label::not_sick, Label::not_sick};
  CHECK(information_gain(perfect, y) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<std::uint8_t> indep{1, 0, 1, 0};
  CHECK(information_gain(indep, y) == doctest::Approx(0.0).scale(1.0));

  // Six instances: present {S,S,N}, absent {S,N,N}.
  const std::vector<std::uint8_t> p6{1, 1, 1, 0, 0, 0};
  const std::vector<Label> y6{Label::sick, Label::sick, Label::not_sick, Label::sick, Label::not_sick, Label::not_sick};
  const double expected = 1.0 - 0.5 * oracle::entropy2(2.0 / 3.0) - 0.5 * oracle::entropy2(1.0 / 3.0);
  CHECK(information_gain(p6, y6) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(information_gain(2, 1, 1, 2) == doctest::Approx(expected).epsilon(1e-14));

  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t ps = rng.below(20), pn = rng.below(20), as = rng.below(20), an = rng.below(20) + 1;
    const double g = information_gain(ps, pn, as, an);
    CHECK(g >= -1e-15);
    CHECK(g <= 1.0 + 1e-15);
    const double n = ps + pn + as + an, np = ps + pn, na = as + an;
    const double h = oracle::entropy2((ps + as) / n);
    const double hc = (np ? np / n * oracle::entropy2(ps / np) : 0.0) + (na ? na / n * oracle::entropy2(as / na) : 0.0);
    CHECK(g == doctest::Approx(h - hc).scale(1.0).epsilon(1e-12));
  }
  CHECK(information_gain(3, 6, 1, 2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("mined keywords follow the gain ranking") {
  // Stem x appears iff sick, z in half the sick and none of the healthy, y everywhere.
  std::vector<std::vector<StemmedDoc>> inst;
  std::vector<Label> labels;
  for (int i = 0; i < 8; ++i) {
    const bool sick = i < 4;
    std::vector<std::string> s{"y"};
    if (sick) s.push_back("x");
    if (sick && i < 2) s.push_back("z");
    inst.push_back({doc(s)});
    labels.push_back(sick ? Label::sick : Label::not_sick);
  }
  const auto k2 = mine_keywords(inst, labels, 2);
  CHECK(k2.keywords == std::vector<std::string>{"x", "z"});
  CHECK(k2.source == KeywordSource::mined);
  const auto k3 = mine_keywords(inst, labels, 3);
  CHECK(k3.keywords == std::vector<std::string>{"x", "z", "y"});
  CHECK_THROWS_AS(mine_keywords(inst, labels, 4), ConfigError);
}

TEST_CASE("mined keywords are nested and recover injected stems") {
  corpus::SyntheticConfig cfg;
  cfg.n_seed_users = 120;
  const auto cohort = corpus::generate_synthetic_cohort(cfg);
  const auto prepared = pipeline::prepare(cohort, textprep::StopList::bundled());
  std::vector<std::size_t> rows(prepared.labels.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto k10 = mine_keywords(prepared.own, prepared.labels, rows, 10);
  const auto k100 = mine_keywords(prepared.own, prepared.labels, rows, 100);
  CHECK(std::equal(k10.keywords.begin(), k10.keywords.end(), k100.keywords.begin()));

  std::set<std::string> injected;
  for (const auto& kw : cfg.sick_vocabulary)
    for (const auto& s : textprep::preprocess(kw.text, textprep::StopList::bundled()).stems) injected.insert(s);
  for (const auto& phrase : cfg.self_report_phrases)
    for (const auto& s : textprep::preprocess(phrase, textprep::StopList::bundled()).stems) injected.insert(s);
  std::size_t hits = 0;
  std::string top;
  for (const auto& k : k10.keywords) {
    hits += injected.count(k);
    top += " " + k;
  }
  MESSAGE("top 10:" << top << "; injected: " << hits);
  CHECK(hits >= 7);
}

TEST_CASE("normalized rates") {
  KeywordSet ks{{"flu"}, KeywordSource::mined, 1};
  const std::vector<StemmedDoc> s{doc({"flu", "flu"})};
  CHECK(normalized_rate_vector(s, 7, ks).values[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
  CHECK(normalized_rate_vector(std::vector<StemmedDoc>{}, 0, ks).values[0] == 0.0);

  Rng rng(43);
  const auto expert = expert_keywords();
  for (int i = 0; i < 300; ++i) {
    const auto month = random_month(rng, kPool);
    std::size_t chars = 0;
    for (const auto& d : month) chars += d.source_char_count;
    const auto v = normalized_rate_vector(month, chars, expert);
    const auto padded = normalized_rate_vector(month, chars + 10, expert);
    for (std::size_t k = 0; k < expert.keywords.size(); ++k) {
      std::size_t count = 0;
      for (const auto& d : month) count += std::count(d.stems.begin(), d.stems.end(), expert.keywords[k]);
      const double want = chars ? double(count) / chars : 0.0;
      CHECK(v.values[k] == doctest::Approx(want).epsilon(1e-15));
      if (v.values[k] > 0) CHECK(padded.values[k] < v.values[k]);
    }
  }
}

TEST_CASE("top predictive ratios by hand") {
  BagCorpus c;
  const std::vector<StemmedDoc> d1{doc({"flu", "flu", "day"})}, d2{doc({"flu", "work"})}, d3{doc({"day", "work"})},
      d4{doc({"day", "work", "work"})};
  c.add_instance(d1);
  c.add_instance(d2);
  c.add_instance(d3);
  c.add_instance(d4);
  const std::vector<Label> y{Label::sick, Label::sick, Label::not_sick, Label::not_sick};
  const auto r = top_predictive_keywords(c, y, 3);
  // Sick tokens 5, healthy tokens 5, vocabulary 3.
  const double flu = (3.0 + 1) / (5 + 3) / ((0.0 + 1) / (5 + 3));
  const double day = (1.0 + 1) / 8 / ((2.0 + 1) / 8);
  const double work = (1.0 + 1) / 8 / ((3.0 + 1) / 8);
  REQUIRE(r.size() == 3);
  CHECK(r[0].keyword == "flu");
  CHECK(r[0].ratio == doctest::Approx(flu).epsilon(1e-14));
  CHECK(r[1].keyword == "day");
  CHECK(r[1].ratio == doctest::Approx(day).epsilon(1e-14));
  CHECK(r[2].ratio == doctest::Approx(work).epsilon(1e-14));

  BagCorpus even;
  const std::vector<StemmedDoc> e1{doc({"a", "b"})}, e2{doc({"a", "b"})};
  even.add_instance(e1);
  even.add_instance(e2);
  const std::vector<Label> ey{Label::sick, Label::not_sick};
  for (const auto& kr : top_predictive_keywords(even, ey, 2)) CHECK(kr.ratio == doctest::Approx(1.0));
}

TEST_CASE("bag from terms") {
  const auto b = Bag::from_terms({3, 1, 3, 2, 3}, 12);
  CHECK(b.terms == std::vector<std::pair<TermId, std::uint32_t>>{{1, 1}, {2, 1}, {3, 3}});
  CHECK(b.token_count == 5);
  CHECK(b.char_count == 12);
  CHECK(b.count_of(3) == 3);
  CHECK(b.count_of(9) == 0);
}

}  // TEST_SUITE
