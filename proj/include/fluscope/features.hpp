#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fluscope/dataset.hpp"
#include "fluscope/textprep.hpp"
#include "fluscope/types.hpp"

namespace fluscope::features {

using TermId = std::uint32_t;

/// Interned stems.
class Lexicon {
 public:
  TermId intern(std::string_view term);
  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

/// Term counts of one instance: (term, occurrences) sorted by term id.
struct Bag {
  std::vector<std::pair<TermId, std::uint32_t>> terms;
  std::size_t char_count = 0;
  std::size_t token_count = 0;

  std::uint32_t count_of(TermId t) const;
  /// Bag of an unordered list of term occurrences.
  static Bag from_terms(std::vector<TermId> terms, std::size_t char_count);
};

/// One bag per classification instance over a shared lexicon.
struct BagCorpus {
  Lexicon lexicon;
  std::vector<Bag> bags;

  /// Appends an instance made of several documents (e.g. the tweets of a month).
  void add_instance(std::span<const textprep::StemmedDoc> docs);
  void add_instance(std::span<const std::vector<TermId>> docs, std::size_t char_count);
};

enum class KeywordSource { expert, mined };

struct KeywordSet {
  std::vector<std::string> keywords;
  KeywordSource source = KeywordSource::expert;
  std::size_t k = 0;

  std::string schema_id() const;
};

/// flu, influenza, sick, cough, cold, medicine, fever; stored stemmed.
KeywordSet expert_keywords();

struct KeywordRatio {
  std::string keyword;
  double ratio = 0.0;
};

/// values[i] = 1 iff keyword i occurs in any document of the instance.
FeatureVector presence_vector(std::span<const textprep::StemmedDoc> docs, const KeywordSet& ks);

/// Stems by descending total count, ties lexicographic, truncated to max_size.
std::vector<std::string> build_vocabulary(std::span<const textprep::StemmedDoc> corpus, std::size_t max_size);

/// Same ranking restricted to `rows`; shards counts across threads.
std::vector<TermId> build_vocabulary(const BagCorpus& corpus, std::span<const std::size_t> rows,
                                     std::size_t max_size);

namespace serial {
std::vector<TermId> build_vocabulary(const BagCorpus& corpus, std::span<const std::size_t> rows,
                                     std::size_t max_size);
}  // namespace serial

/// H(label) - H(label | presence) in bits.
double information_gain(std::span<const std::uint8_t> presence, std::span<const Label> labels);
/// From the 2x2 counts: present&sick, present&not, absent&sick, absent&not.
double information_gain(std::size_t present_sick, std::size_t present_not, std::size_t absent_sick,
                        std::size_t absent_not);

struct RankedTerm {
  TermId term;
  double gain;
};

/// Vocabulary of the `rows` (max vocab_max terms) ranked by information gain of
/// presence against the label; ties keep vocabulary order.
std::vector<RankedTerm> rank_by_information_gain(const BagCorpus& corpus, std::span<const Label> labels,
                                                 std::span<const std::size_t> rows, std::size_t vocab_max);

/// Top-k stems by information gain. Throws ConfigError if k exceeds the vocabulary.
KeywordSet mine_keywords(const BagCorpus& corpus, std::span<const Label> labels,
                         std::span<const std::size_t> rows, std::size_t k, std::size_t vocab_max = 12393);
/// Convenience overload over all instances; one StemmedDoc list per instance.
KeywordSet mine_keywords(std::span<const std::vector<textprep::StemmedDoc>> instances,
                         std::span<const Label> labels, std::size_t k, std::size_t vocab_max = 12393);

/// values[i] = occurrences of keyword i in the stream / total_char_count (zero vector if no characters).
FeatureVector normalized_rate_vector(std::span<const textprep::StemmedDoc> stream, std::size_t total_char_count,
                                     const KeywordSet& ks);

/// Per-stem smoothed rate ratio, sick over not sick, with add-one smoothing:
/// (c_sick + 1) / (N_sick + V) over (c_not + 1) / (N_not + V). Top n by ratio, ties lexicographic.
std::vector<KeywordRatio> top_predictive_keywords(const BagCorpus& corpus, std::span<const Label> labels,
                                                  std::size_t n = 30);

/// Feature matrices over a fixed list of term ids.
Dataset presence_dataset(const BagCorpus& corpus, std::span<const Label> labels,
                         std::span<const std::string> ids, std::span<const TermId> terms,
                         const std::string& schema_id);
Dataset rate_dataset(const BagCorpus& corpus, std::span<const Label> labels, std::span<const std::string> ids,
                     std::span<const TermId> terms, const std::string& schema_id);

}  // namespace fluscope::features
