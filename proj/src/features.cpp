#include "fluscope/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "fluscope/parallel.hpp"

namespace fluscope::features {

TermId Lexicon::intern(std::string_view term) {
  const auto [it, inserted] = index_.try_emplace(std::string(term), static_cast<TermId>(terms_.size()));
  if (inserted) terms_.emplace_back(term);
  return it->second;
}

std::optional<TermId> Lexicon::find(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Bag::count_of(TermId t) const {
  const auto it = std::lower_bound(terms.begin(), terms.end(), t,
                                   [](const auto& entry, TermId id) { return entry.first < id; });
  return (it != terms.end() && it->first == t) ? it->second : 0;
}

namespace {

Bag bag_from_counts(std::unordered_map<TermId, std::uint32_t>& counts) {
  Bag bag;
  bag.terms.assign(counts.begin(), counts.end());
  std::sort(bag.terms.begin(), bag.terms.end());
  for (const auto& [t, c] : bag.terms) bag.token_count += c;
  return bag;
}

}  // namespace

Bag Bag::from_terms(std::vector<TermId> terms, std::size_t char_count) {
  std::sort(terms.begin(), terms.end());
  Bag bag;
  bag.char_count = char_count;
  bag.token_count = terms.size();
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i;
    while (j < terms.size() && terms[j] == terms[i]) ++j;
    bag.terms.emplace_back(terms[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return bag;
}

void BagCorpus::add_instance(std::span<const textprep::StemmedDoc> docs) {
  std::unordered_map<TermId, std::uint32_t> counts;
  std::size_t chars = 0;
  for (const auto& d : docs) {
    chars += d.source_char_count;
    for (const auto& s : d.stems) ++counts[lexicon.intern(s)];
  }
  Bag bag = bag_from_counts(counts);
  bag.char_count = chars;
  bags.push_back(std::move(bag));
}

void BagCorpus::add_instance(std::span<const std::vector<TermId>> docs, std::size_t char_count) {
  std::unordered_map<TermId, std::uint32_t> counts;
  for (const auto& d : docs)
    for (const auto t : d) ++counts[t];
  Bag bag = bag_from_counts(counts);
  bag.char_count = char_count;
  bags.push_back(std::move(bag));
}

std::string KeywordSet::schema_id() const {
  if (source == KeywordSource::expert && k == 0) {
    std::string id = "expert";
    for (const auto& w : keywords) id += ":" + w;
    return id;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : keywords) {
    for (unsigned char c : w) h = (h ^ c) * 0x100000001b3ULL;
    h = (h ^ 0xFF) * 0x100000001b3ULL;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-k%zu-%016llx", source == KeywordSource::expert ? "expert" : "mined", k,
                static_cast<unsigned long long>(h));
  return buf;
}

KeywordSet expert_keywords() {
  return {{"flu", "influenza", "sick", "cough", "cold", "medicin", "fever"}, KeywordSource::expert, 0};
}

FeatureVector presence_vector(std::span<const textprep::StemmedDoc> docs, const KeywordSet& ks) {
  std::set<std::string_view> present;
  for (const auto& d : docs)
    for (const auto& s : d.stems) present.insert(s);
  FeatureVector fv{std::vector<double>(ks.keywords.size(), 0.0), ks.schema_id()};
  for (std::size_t i = 0; i < ks.keywords.size(); ++i)
    if (present.contains(ks.keywords[i])) fv.values[i] = 1.0;
  return fv;
}

std::vector<std::string> build_vocabulary(std::span<const textprep::StemmedDoc> corpus, std::size_t max_size) {
  if (max_size < 1) throw ConfigError("vocabulary max_size must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus)
    for (const auto& s : d.stems) ++counts[s];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < max_size; ++i) out.push_back(ranked[i].first);
  return out;
}

namespace {

std::vector<TermId> rank_terms(const BagCorpus& corpus, const std::vector<std::uint64_t>& counts,
                               std::size_t max_size) {
  std::vector<TermId> ids;
  for (TermId t = 0; t < counts.size(); ++t)
    if (counts[t] > 0) ids.push_back(t);
  std::sort(ids.begin(), ids.end(), [&](TermId a, TermId b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return corpus.lexicon.term(a) < corpus.lexicon.term(b);
  });
  if (ids.size() > max_size) ids.resize(max_size);
  return ids;
}

}  // namespace

std::vector<TermId> build_vocabulary(const BagCorpus& corpus, std::span<const std::size_t> rows,
                                     std::size_t max_size) {
  if (max_size < 1) throw ConfigError("vocabulary max_size must be at least 1");
  const std::size_t v = corpus.lexicon.size();
  const std::size_t shards = static_cast<std::size_t>(std::max(1, thread_count()));
  std::vector<std::vector<std::uint64_t>> partial(shards, std::vector<std::uint64_t>(v, 0));
  parallel_for(shards, [&](std::size_t s) {
    auto& local = partial[s];
    for (std::size_t i = s; i < rows.size(); i += shards)
      for (const auto& [t, c] : corpus.bags[rows[i]].terms) local[t] += c;
  });
  std::vector<std::uint64_t> counts(v, 0);
  for (const auto& p : partial)
    for (std::size_t t = 0; t < v; ++t) counts[t] += p[t];
  return rank_terms(corpus, counts, max_size);
}

namespace serial {
std::vector<TermId> build_vocabulary(const BagCorpus& corpus, std::span<const std::size_t> rows,
                                     std::size_t max_size) {
  if (max_size < 1) throw ConfigError("vocabulary max_size must be at least 1");
  std::vector<std::uint64_t> counts(corpus.lexicon.size(), 0);
  for (const auto r : rows)
    for (const auto& [t, c] : corpus.bags[r].terms) counts[t] += c;
  return rank_terms(corpus, counts, max_size);
}
}  // namespace serial

namespace {

double entropy2(double a, double b) {
  const double n = a + b;
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (const double x : {a, b})
    if (x > 0.0) h -= (x / n) * std::log2(x / n);
  return h;
}

}  // namespace

double information_gain(std::size_t present_sick, std::size_t present_not, std::size_t absent_sick,
                        std::size_t absent_not) {
  const double ps = static_cast<double>(present_sick), pn = static_cast<double>(present_not);
  const double as = static_cast<double>(absent_sick), an = static_cast<double>(absent_not);
  const double n = ps + pn + as + an;
  if (n <= 0.0) throw InsufficientData("information gain of an empty dataset");
  const double conditional = ((ps + pn) / n) * entropy2(ps, pn) + ((as + an) / n) * entropy2(as, an);
  const double gain = entropy2(ps + as, pn + an) - conditional;
  return gain > 0.0 ? gain : 0.0;
}

double information_gain(std::span<const std::uint8_t> presence, std::span<const Label> labels) {
  if (presence.size() != labels.size()) throw ConfigError("presence and labels differ in length");
  std::size_t c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < presence.size(); ++i) ++c[presence[i] ? 1 : 0][is_sick(labels[i]) ? 1 : 0];
  return information_gain(c[1][1], c[1][0], c[0][1], c[0][0]);
}

std::vector<RankedTerm> rank_by_information_gain(const BagCorpus& corpus, std::span<const Label> labels,
                                                 std::span<const std::size_t> rows, std::size_t vocab_max) {
  const auto vocab = build_vocabulary(corpus, rows, vocab_max);
  std::vector<std::uint32_t> present_sick(corpus.lexicon.size(), 0), present_not(corpus.lexicon.size(), 0);
  std::size_t n_sick = 0, n_not = 0;
  for (const auto r : rows) {
    const bool sick = is_sick(labels[r]);
    (sick ? n_sick : n_not)++;
    auto& target = sick ? present_sick : present_not;
    for (const auto& [t, c] : corpus.bags[r].terms) ++target[t];
  }
  std::vector<RankedTerm> ranked;
  ranked.reserve(vocab.size());
  for (const auto t : vocab)
    ranked.push_back({t, information_gain(present_sick[t], present_not[t], n_sick - present_sick[t],
                                          n_not - present_not[t])});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.gain > b.gain; });
  return ranked;
}

KeywordSet mine_keywords(const BagCorpus& corpus, std::span<const Label> labels, std::span<const std::size_t> rows,
                         std::size_t k, std::size_t vocab_max) {
  const auto ranked = rank_by_information_gain(corpus, labels, rows, vocab_max);
  if (k > ranked.size())
    throw ConfigError("cannot mine " + std::to_string(k) + " keywords from a vocabulary of " +
                      std::to_string(ranked.size()));
  KeywordSet ks{{}, KeywordSource::mined, k};
  for (std::size_t i = 0; i < k; ++i) ks.keywords.push_back(corpus.lexicon.term(ranked[i].term));
  return ks;
}

KeywordSet mine_keywords(std::span<const std::vector<textprep::StemmedDoc>> instances, std::span<const Label> labels,
                         std::size_t k, std::size_t vocab_max) {
  BagCorpus corpus;
  for (const auto& docs : instances) corpus.add_instance(docs);
  std::vector<std::size_t> rows(instances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return mine_keywords(corpus, labels, rows, k, vocab_max);
}

FeatureVector normalized_rate_vector(std::span<const textprep::StemmedDoc> stream, std::size_t total_char_count,
                                     const KeywordSet& ks) {
  FeatureVector fv{std::vector<double>(ks.keywords.size(), 0.0), ks.schema_id()};
  if (total_char_count == 0) return fv;
  std::unordered_map<std::string_view, std::size_t> column;
  for (std::size_t i = 0; i < ks.keywords.size(); ++i) column.emplace(ks.keywords[i], i);
  for (const auto& d : stream)
    for (const auto& s : d.stems)
      if (const auto it = column.find(s); it != column.end()) fv.values[it->second] += 1.0;
  for (auto& v : fv.values) v /= static_cast<double>(total_char_count);
  return fv;
}

std::vector<KeywordRatio> top_predictive_keywords(const BagCorpus& corpus, std::span<const Label> labels,
                                                  std::size_t n) {
  if (labels.size() != corpus.bags.size()) throw ConfigError("labels and corpus differ in length");
  const std::size_t v_all = corpus.lexicon.size();
  std::vector<std::uint64_t> sick(v_all, 0), not_sick(v_all, 0);
  std::uint64_t total_sick = 0, total_not = 0;
  bool any_sick = false, any_not = false;
  for (std::size_t i = 0; i < corpus.bags.size(); ++i) {
    const bool s = is_sick(labels[i]);
    (s ? any_sick : any_not) = true;
    for (const auto& [t, c] : corpus.bags[i].terms) {
      (s ? sick : not_sick)[t] += c;
      (s ? total_sick : total_not) += c;
    }
  }
  if (!any_sick || !any_not) throw ConfigError("top_predictive_keywords needs instances of both classes");
  std::vector<TermId> present;
  for (TermId t = 0; t < v_all; ++t)
    if (sick[t] + not_sick[t] > 0) present.push_back(t);
  const double vocab = static_cast<double>(present.size());
  std::vector<KeywordRatio> ratios;
  ratios.reserve(present.size());
  for (const auto t : present) {
    const double rate_sick = (static_cast<double>(sick[t]) + 1.0) / (static_cast<double>(total_sick) + vocab);
    const double rate_not = (static_cast<double>(not_sick[t]) + 1.0) / (static_cast<double>(total_not) + vocab);
    ratios.push_back({corpus.lexicon.term(t), rate_sick / rate_not});
  }
  std::sort(ratios.begin(), ratios.end(), [](const auto& a, const auto& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.keyword < b.keyword;
  });
  if (ratios.size() > n) ratios.resize(n);
  return ratios;
}

namespace {

template <class Value>
Dataset keyword_dataset(const BagCorpus& corpus, std::span<const Label> labels, std::span<const std::string> ids,
                        std::span<const TermId> terms, const std::string& schema_id, Value value) {
  std::vector<int> column(corpus.lexicon.size(), -1);
  for (std::size_t j = 0; j < terms.size(); ++j) column[terms[j]] = static_cast<int>(j);
  Dataset ds(schema_id, terms.size());
  std::vector<double> row(terms.size());
  for (std::size_t i = 0; i < corpus.bags.size(); ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    const auto& bag = corpus.bags[i];
    for (const auto& [t, c] : bag.terms)
      if (column[t] >= 0) row[static_cast<std::size_t>(column[t])] = value(c, bag);
    ds.add(row, labels[i], ids[i]);
  }
  return ds;
}

}  // namespace

Dataset presence_dataset(const BagCorpus& corpus, std::span<const Label> labels, std::span<const std::string> ids,
                         std::span<const TermId> terms, const std::string& schema_id) {
  return keyword_dataset(corpus, labels, ids, terms, schema_id, [](std::uint32_t, const Bag&) { return 1.0; });
}

Dataset rate_dataset(const BagCorpus& corpus, std::span<const Label> labels, std::span<const std::string> ids,
                     std::span<const TermId> terms, const std::string& schema_id) {
  return keyword_dataset(corpus, labels, ids, terms, schema_id, [](std::uint32_t c, const Bag& bag) {
    return bag.char_count == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(bag.char_count);
  });
}

}  // namespace fluscope::features
