#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metatag/graph.hpp"

namespace metatag {

using Vocabulary = std::unordered_map<std::string, std::size_t>;

// Pre-trained vectors for one language. The last row is the UNK vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // `matrix` holds one row per vocabulary entry followed by the UNK row.
  EmbeddingTable(std::string language, std::vector<std::string> tokens, Tensor matrix,
                 bool trainable = false);

  const std::string& language() const { return language_; }
  std::size_t dim() const { return matrix_.value().cols(); }
  std::size_t rows() const { return matrix_.value().rows(); }
  std::size_t unk_row() const { return rows() - 1; }
  const Vocabulary& vocabulary() const { return vocab_; }
  // Tokens in row order (UNK excluded).
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool trainable() const { return trainable_; }
  void set_trainable(bool on) { trainable_ = on; }

  Parameter& matrix() { return matrix_; }
  const Parameter& matrix() const { return matrix_; }
  void rename(std::string name);

  // Row indices whose mean is the token's vector: the token's own row on a
  // whole-word hit, otherwise one row per subword piece (UNK for misses).
  std::vector<std::size_t> rows_for(std::string_view token) const;

 private:
  std::string language_;
  std::vector<std::string> tokens_;
  Vocabulary vocab_;
  Parameter matrix_;
  bool trainable_ = false;
};

// Reads the word2vec text format: a "count dim" header, then one token and
// `dim` reals per line. An UNK row holding the mean vector is appended.
EmbeddingTable load_table(std::string_view text, std::string language);
EmbeddingTable load_table_file(const std::string& path, std::string language);
std::string write_table(const EmbeddingTable& table);

// Greedy longest-prefix split against `vocab`. Characters that start no
// known piece come out as single-code-point pieces. Pieces concatenate back
// to `token`.
std::vector<std::string> segment(std::string_view token, const Vocabulary& vocab);

std::vector<double> lookup(std::string_view token, const EmbeddingTable& table);

// Differentiable lookup: gathers rows from the table's parameter when the
// table is trainable, otherwise inserts a constant.
Var lookup(Graph& g, std::string_view token, EmbeddingTable& table);

// Ordered sources e_1..e_n; the same language may appear more than once.
using EmbeddingSet = std::vector<EmbeddingTable>;

}  // namespace metatag
