#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace metatag {

// Add-one smoothed unigram model; one extra UNK type absorbs unseen words.
class UnigramLM {
 public:
  UnigramLM() = default;
  UnigramLM(std::string language, std::span<const std::string> tokens);

  const std::string& language() const { return language_; }
  std::size_t total() const { return total_; }
  std::size_t vocabulary_size() const { return counts_.size() + 1; }  // + UNK
  double probability(const std::string& token) const;
  double unk_probability() const;

 private:
  std::string language_;
  std::unordered_map<std::string, std::size_t> counts_;
  std::size_t total_ = 0;
};

UnigramLM train_unigram(std::span<const std::string> tokens, std::string language = {});

// exp(-mean log p(w)) over `text`.
double perplexity(const UnigramLM& lm, std::span<const std::string> text);
double perplexity(const std::function<double(const std::string&)>& probability,
                  std::span<const std::string> text);

// Add-one smoothed character n-gram model scored on another text's code
// points. Histories at the start of the text are padded with a boundary
// symbol; order 1 is a plain character unigram model.
class CharNgramLM {
 public:
  CharNgramLM(std::string_view corpus, std::size_t order);
  std::size_t order() const { return order_; }
  double perplexity(std::string_view text) const;

 private:
  std::size_t order_;
  std::set<std::string> alphabet_;
  std::unordered_map<std::string, std::size_t> history_counts_;
  std::unordered_map<std::string, std::size_t> ngram_counts_;
};

double charlm_perplexity(std::string_view l1_corpus, std::string_view l2_text, std::size_t order = 5);

// Vocabulary-overlap distance from its counts:
//   (W(L1|L2) + W(L2|L1)) / (2 min(N(L1), N(L2)))
double vocab_overlap(std::size_t shared_12, std::size_t shared_21, std::size_t pooled_1,
                     std::size_t pooled_2);

using TypeSet = std::set<std::string>;

// Lowercased vocabulary types of a token stream.
TypeSet vocabulary_types(std::span<const std::string> tokens);

// d_V between two languages of `pool`: W counts types of one language found in
// the other, N counts types of a language found in any other pool member.
double vocab_overlap(const std::map<std::string, TypeSet>& pool, const std::string& l1,
                     const std::string& l2);

enum class Measure { kPerplexity, kCharPerplexity, kVocab, kVocabTrain };
std::string to_string(Measure m);  // "dP", "dPF", "dV", "dVT"
Measure parse_measure(const std::string& name);
// Perplexities rank ascending, overlaps descending.
bool lower_is_closer(Measure m);

// measure value for each ordered (L1, L2) pair
struct DistanceMatrix {
  Measure measure = Measure::kPerplexity;
  std::map<std::pair<std::string, std::string>, double> values;
};

// Ordered auxiliary languages, closest first, grouped into tie sets.
struct Ranking {
  std::string target;
  std::vector<std::vector<std::string>> groups;

  std::vector<std::string> languages() const;  // flattened order
  // Mid-rank (ties share the mean of the positions they occupy).
  double rank_of(const std::string& language) const;
  friend bool operator==(const Ranking&, const Ranking&) = default;
};

inline constexpr double kTieTolerance = 1e-9;

// Ranks every language paired with `target` (values m(target, aux)).
Ranking rank_by_measure(const DistanceMatrix& m, const std::string& target);

// Majority vote over per-measure rankings: positions are filled one at a
// time by the language most rankings place there (a tie group counts at
// every position it spans), plurality ties go to the lower mean rank, and
// languages still level on mean rank share a tie group.
Ranking vote(std::span<const Ranking> rankings);

// Spearman's rho as the Pearson correlation of mid-ranks.
double spearman(const Ranking& a, const Ranking& b);
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> mid_ranks(std::span<const double> values);

// Column layout: one column per ranking, rank rows, "*" after tied
// entries.
std::string format_rankings(std::span<const Ranking> rankings,
                            std::span<const std::string> column_labels = {});
// Rows "target<TAB>measure<TAB>lang<TAB>lang*..."; consecutive starred
// entries form one tie group.
struct LabeledRanking {
  std::string measure;
  Ranking ranking;
};
std::vector<LabeledRanking> parse_rankings(std::string_view text);
std::string format_distance_matrix(const DistanceMatrix& m);
std::vector<DistanceMatrix> parse_distance_matrices(std::string_view text);

struct AdviceContext {
  bool can_train_embeddings = false;
  bool has_multilingual = false;
  bool distances_available = false;
};

enum class Advice { kMetaEmbeddings, kMonoPlusMultilingual, kDistanceRanking };

struct Recommendation {
  Advice advice;
  std::string text;
};

Recommendation advise(const AdviceContext& context);

}  // namespace metatag
