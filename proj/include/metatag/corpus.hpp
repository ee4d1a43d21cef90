#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metatag {

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

// Sentences in file order plus the tag inventory in first-seen order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<TaggedSentence> sentences, std::string split = {});

  const std::vector<TaggedSentence>& sentences() const { return sentences_; }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& split() const { return split_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  std::size_t token_count() const;
  const TaggedSentence& operator[](std::size_t i) const { return sentences_[i]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<TaggedSentence> sentences_;
  std::vector<std::string> tags_;
  std::string split_;
};

// Whitespace-separated fields of each non-blank line, grouped into blank-line
// separated blocks. Line numbers (1-based) are kept for error reporting.
struct ColumnLine {
  std::size_t line_number = 0;
  std::vector<std::string> fields;
};
using ColumnBlock = std::vector<ColumnLine>;

std::vector<ColumnBlock> read_column_blocks(std::string_view text, char separator = 0);

// Sentinel for "the last column of each line".
inline constexpr int kLastColumn = -1;

struct ConllOptions {
  std::size_t token_col = 0;
  int tag_col = kLastColumn;
  bool normalize_iob2 = true;
  std::string split;
};

Dataset parse_conll(std::string_view text, const ConllOptions& options = {});
Dataset parse_conllu(std::string_view text, std::string split = {});
std::string read_text_file(const std::string& path);

// Rewrites IOB1-style tags so every span starts with B-. Non-IOB tags pass
// through unchanged.
std::vector<std::string> to_iob2(const std::vector<std::string>& tags);

// Two columns (token, tag), blank line between sentences.
std::string write_conll(const Dataset& dataset);

// Seeded shuffle of sentence indices cut into groups of `size`.
std::vector<std::vector<std::size_t>> batches(const Dataset& dataset, std::size_t size,
                                              std::uint64_t seed);

}  // namespace metatag
