#include "metatag/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "metatag/rng.hpp"

namespace metatag {

namespace {

enum Tag { kDet, kNoun, kPropn, kVerb, kPunct, kTagCount };
constexpr std::array<const char*, kTagCount> kTagNames = {"DET", "NOUN", "PROPN", "VERB", "PUNCT"};
constexpr std::array<std::size_t, kTagCount> kWordsPerTag = {4, 12, 12, 10, 2};

std::string make_word(Rng& rng, std::size_t syllables) {
  static constexpr char kOnsets[] = "bdfgklmnprstvz";
  static constexpr char kVowels[] = "aeiou";
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.below(sizeof kOnsets - 1)];
    w += kVowels[rng.below(sizeof kVowels - 1)];
  }
  return w;
}

std::vector<double> gaussian(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticOptions& options) {
  Rng rng(options.seed);

  std::array<std::vector<std::string>, kTagCount> lexicon;
  std::vector<std::string> seen;
  for (std::size_t t = 0; t < kTagCount; ++t) {
    while (lexicon[t].size() < kWordsPerTag[t]) {
      std::string w = t == kPunct ? std::string(lexicon[t].empty() ? "." : "!")
                                  : make_word(rng, t == kDet ? 1 : 2 + rng.below(2));
      if (std::find(seen.begin(), seen.end(), w) != seen.end()) continue;
      seen.push_back(w);
      lexicon[t].push_back(w);
    }
  }

  auto sentence = [&]() {
    TaggedSentence s;
    auto emit = [&](Tag tag) {
      s.tokens.push_back(lexicon[tag][rng.below(lexicon[tag].size())]);
      s.tags.emplace_back(kTagNames[tag]);
    };
    auto argument = [&]() {
      if (rng.bernoulli(0.5)) emit(kDet);
      emit(rng.bernoulli(options.proper_noun_rate) ? kPropn : kNoun);
    };
    argument();
    emit(kVerb);
    argument();
    emit(kPunct);
    return s;
  };
  auto make_split = [&](std::size_t n, const char* split) {
    std::vector<TaggedSentence> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(sentence());
    return Dataset(std::move(out), split);
  };

  SyntheticCorpus corpus;
  corpus.train = make_split(options.train_sentences, "train");
  corpus.dev = make_split(options.dev_sentences, "dev");
  corpus.test = make_split(options.test_sentences, "test");

  constexpr std::size_t kFirstDim = 8, kSecondDim = 6;
  std::array<std::vector<double>, kTagCount> proto_first, proto_second;
  for (std::size_t t = 0; t < kTagCount; ++t) {
    proto_first[t] = gaussian(rng, kFirstDim, 1.0);
    proto_second[t] = gaussian(rng, kSecondDim, 1.0);
  }
  if (options.conflate_first) proto_first[kPropn] = proto_first[kNoun];

  std::vector<std::string> tokens;
  std::vector<double> first_values, second_values;
  for (std::size_t t = 0; t < kTagCount; ++t) {
    for (const auto& w : lexicon[t]) {
      tokens.push_back(w);
      first_values.insert(first_values.end(), proto_first[t].begin(), proto_first[t].end());
      const auto noise = gaussian(rng, kSecondDim, 0.1);
      for (std::size_t j = 0; j < kSecondDim; ++j) second_values.push_back(proto_second[t][j] + noise[j]);
    }
  }
  auto with_mean_row = [](std::vector<double> values, std::size_t dim) {
    const std::size_t rows = values.size() / dim;
    std::vector<double> mean(dim, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < dim; ++j) mean[j] += values[r * dim + j] / static_cast<double>(rows);
    }
    values.insert(values.end(), mean.begin(), mean.end());
    return Tensor::matrix(rows + 1, dim, std::move(values));
  };
  corpus.first = EmbeddingTable("sa", tokens, with_mean_row(first_values, kFirstDim));

  if (options.uninformative_second) {
    constexpr std::size_t kPool = 3;
    std::array<std::vector<double>, kPool> pool;
    for (auto& v : pool) v = gaussian(rng, kSecondDim, 1.0);
    std::vector<double> values;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& v = pool[rng.below(kPool)];
      values.insert(values.end(), v.begin(), v.end());
    }
    corpus.second = EmbeddingTable("sb", tokens, with_mean_row(values, kSecondDim));
  } else {
    corpus.second = EmbeddingTable("sb", tokens, with_mean_row(second_values, kSecondDim));
  }
  return corpus;
}

}  // namespace metatag
