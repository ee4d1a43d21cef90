#include "metatag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "metatag/error.hpp"
#include "metatag/rng.hpp"
#include "metatag/utf8.hpp"

namespace metatag {

Dataset::Dataset(std::vector<TaggedSentence> sentences, std::string split)
    : sentences_(std::move(sentences)), split_(std::move(split)) {
  std::unordered_set<std::string> seen;
  for (const auto& s : sentences_) {
    if (s.tokens.empty()) throw ArgumentError("sentence with no tokens");
    if (s.tokens.size() != s.tags.size()) {
      throw ArgumentError("sentence has " + std::to_string(s.tokens.size()) + " tokens but " +
                          std::to_string(s.tags.size()) + " tags");
    }
    for (const auto& t : s.tags) {
      if (seen.insert(t).second) tags_.push_back(t);
    }
  }
}

std::size_t Dataset::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.tokens.size();
  return n;
}

namespace {

void require_utf8(std::string_view text) {
  if (auto bad = utf8::find_invalid(text)) {
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(*bad), '\n');
    throw ParseError("invalid UTF-8 byte sequence", static_cast<std::size_t>(line));
  }
}

std::vector<std::string> split_fields(std::string_view line, char separator) {
  std::vector<std::string> out;
  if (separator) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(separator, start);
      out.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

std::vector<ColumnBlock> read_column_blocks(std::string_view text, char separator) {
  std::vector<ColumnBlock> blocks;
  ColumnBlock current;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_number;
    if (is_blank(line)) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back({line_number, split_fields(line, separator)});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

std::vector<std::string> to_iob2(const std::vector<std::string>& tags) {
  std::vector<std::string> out = tags;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::string& tag = tags[i];
    if (tag.size() < 2 || tag[0] != 'I' || tag[1] != '-') continue;
    const std::string_view type = std::string_view(tag).substr(2);
    bool continues = false;
    if (i > 0) {
      const std::string& prev = out[i - 1];
      continues = prev.size() >= 2 && (prev[0] == 'B' || prev[0] == 'I') && prev[1] == '-' &&
                  std::string_view(prev).substr(2) == type;
    }
    if (!continues) out[i] = "B-" + std::string(type);
  }
  return out;
}

Dataset parse_conll(std::string_view text, const ConllOptions& options) {
  require_utf8(text);
  std::vector<TaggedSentence> sentences;
  for (const auto& block : read_column_blocks(text)) {
    TaggedSentence s;
    for (const auto& line : block) {
      if (line.fields.front() == "-DOCSTART-") continue;
      const std::size_t needed =
          std::max(options.token_col, options.tag_col < 0 ? std::size_t{0}
                                                          : static_cast<std::size_t>(options.tag_col)) +
          1;
      const std::size_t min_needed = options.tag_col < 0 ? std::max<std::size_t>(needed, 2) : needed;
      if (line.fields.size() < min_needed) {
        throw ParseError("expected at least " + std::to_string(min_needed) + " columns, found " +
                             std::to_string(line.fields.size()),
                         line.line_number);
      }
      s.tokens.push_back(line.fields[options.token_col]);
      s.tags.push_back(options.tag_col < 0 ? line.fields.back()
                                           : line.fields[static_cast<std::size_t>(options.tag_col)]);
    }
    if (s.tokens.empty()) continue;
    if (options.normalize_iob2) s.tags = to_iob2(s.tags);
    sentences.push_back(std::move(s));
  }
  return Dataset(std::move(sentences), options.split);
}

Dataset parse_conllu(std::string_view text, std::string split) {
  require_utf8(text);
  std::vector<TaggedSentence> sentences;
  for (const auto& block : read_column_blocks(text, '\t')) {
    TaggedSentence s;
    for (const auto& line : block) {
      if (!line.fields.front().empty() && line.fields.front()[0] == '#') continue;
      if (line.fields.size() != 10) {
        throw ParseError("CoNLL-U token line needs 10 tab-separated columns, found " +
                             std::to_string(line.fields.size()),
                         line.line_number);
      }
      const std::string& id = line.fields[0];
      if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
      s.tokens.push_back(line.fields[1]);
      s.tags.push_back(line.fields[3]);
    }
    if (!s.tokens.empty()) sentences.push_back(std::move(s));
  }
  return Dataset(std::move(sentences), std::move(split));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_conll(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.sentences()) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += ' ';
      out += s.tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(const Dataset& dataset, std::size_t size,
                                              std::uint64_t seed) {
  if (size == 0) throw ArgumentError("batch size must be at least 1");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += size) {
    const auto last = std::min(order.size(), i + size);
    out.emplace_back(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(last));
  }
  return out;
}

}  // namespace metatag
