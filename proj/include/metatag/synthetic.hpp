#pragma once

#include <cstdint>

#include "metatag/corpus.hpp"
#include "metatag/embed.hpp"

namespace metatag {

// Toy tagging task with five tags (DET NOUN PROPN VERB PUNCT). Sentences are
// "subject VERB object PUNCT" where each argument is an optional DET followed
// by a NOUN or a PROPN drawn independently of context.
//
// Two embedding sources cover the same words:
//  - "sa" gives every NOUN and PROPN word one shared vector, so it cannot
//    tell the two apart; the other tags get distinct prototypes.
//  - "sb" separates all five tags (prototype plus small per-word noise).
// With `uninformative_second` the second source instead maps each word to
// one of three random vectors picked without regard to its tag.
struct SyntheticOptions {
  std::size_t train_sentences = 50;
  std::size_t dev_sentences = 50;
  std::size_t test_sentences = 50;
  double proper_noun_rate = 0.25;  // share of argument heads that are PROPN
  bool uninformative_second = false;
  bool conflate_first = true;  // sa merges NOUN and PROPN
  std::uint64_t seed = 2020;
};

struct SyntheticCorpus {
  Dataset train;
  Dataset dev;
  Dataset test;
  EmbeddingTable first;   // "sa", 8 dimensions
  EmbeddingTable second;  // "sb", 6 dimensions
};

SyntheticCorpus make_synthetic(const SyntheticOptions& options = {});

}  // namespace metatag
