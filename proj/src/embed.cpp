#include "metatag/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "metatag/corpus.hpp"
#include "metatag/error.hpp"
#include "metatag/utf8.hpp"

namespace metatag {

EmbeddingTable::EmbeddingTable(std::string language, std::vector<std::string> tokens,
                               Tensor matrix, bool trainable)
    : language_(std::move(language)), tokens_(std::move(tokens)), trainable_(trainable) {
  if (matrix.rank() != 2 || matrix.rows() != tokens_.size() + 1) {
    throw DimensionError("embedding matrix " + shape_string(matrix.shape()) + " does not fit " +
                         std::to_string(tokens_.size()) + " tokens plus UNK");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!vocab_.emplace(tokens_[i], i).second) {
      throw ArgumentError("duplicate token '" + tokens_[i] + "' in " + language_ + " embeddings");
    }
  }
  matrix_ = Parameter("embed." + language_, std::move(matrix));
}

void EmbeddingTable::rename(std::string name) {
  Tensor value = std::move(matrix_.value());
  matrix_ = Parameter(std::move(name), std::move(value));
}

std::vector<std::size_t> EmbeddingTable::rows_for(std::string_view token) const {
  if (auto it = vocab_.find(std::string(token)); it != vocab_.end()) return {it->second};
  std::vector<std::size_t> out;
  for (const auto& piece : segment(token, vocab_)) {
    auto it = vocab_.find(piece);
    out.push_back(it == vocab_.end() ? unk_row() : it->second);
  }
  if (out.empty()) out.push_back(unk_row());
  return out;
}

namespace {

double parse_real(std::string_view field, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ParseError("not a finite real: '" + std::string(field) + "'", line);
  }
  return v;
}

std::size_t parse_count(std::string_view field, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("not a count: '" + std::string(field) + "'", line);
  }
  return v;
}

}  // namespace

EmbeddingTable load_table(std::string_view text, std::string language) {
  if (auto bad = utf8::find_invalid(text)) {
    throw ParseError("invalid UTF-8 byte sequence",
                     1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(*bad), '\n')));
  }
  std::vector<ColumnLine> lines;
  for (auto& block : read_column_blocks(text)) {
    for (auto& l : block) lines.push_back(std::move(l));
  }
  if (lines.empty()) throw ParseError("missing \"count dim\" header", 1);
  const auto& header = lines.front();
  if (header.fields.size() != 2) throw ParseError("header must be \"count dim\"", header.line_number);
  const std::size_t count = parse_count(header.fields[0], header.line_number);
  const std::size_t dim = parse_count(header.fields[1], header.line_number);
  if (dim == 0) throw ParseError("embedding dimension must be positive", header.line_number);
  if (lines.size() - 1 != count) {
    throw ParseError("header announces " + std::to_string(count) + " rows, found " +
                         std::to_string(lines.size() - 1),
                     lines.size() > count + 1 ? lines[count + 1].line_number : lines.back().line_number);
  }
  std::vector<std::string> tokens;
  tokens.reserve(count);
  std::vector<double> values;
  values.reserve((count + 1) * dim);
  std::vector<double> mean(dim, 0.0);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.fields.size() != dim + 1) {
      throw ParseError("expected token and " + std::to_string(dim) + " values, found " +
                           std::to_string(l.fields.size() - 1) + " values",
                       l.line_number);
    }
    if (auto [it, fresh] = seen.emplace(l.fields[0], l.line_number); !fresh) {
      throw ParseError("duplicate token '" + l.fields[0] + "' (first seen on line " +
                           std::to_string(it->second) + ")",
                       l.line_number);
    }
    tokens.push_back(l.fields[0]);
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = parse_real(l.fields[j + 1], l.line_number);
      values.push_back(v);
      mean[j] += v;
    }
  }
  for (auto& m : mean) m = count ? m / static_cast<double>(count) : 0.0;
  values.insert(values.end(), mean.begin(), mean.end());
  return EmbeddingTable(std::move(language), std::move(tokens),
                        Tensor::matrix(count + 1, dim, std::move(values)));
}

EmbeddingTable load_table_file(const std::string& path, std::string language) {
  return load_table(read_text_file(path), std::move(language));
}

std::string write_table(const EmbeddingTable& table) {
  std::string out = std::to_string(table.tokens().size()) + " " + std::to_string(table.dim()) + "\n";
  const Tensor& m = table.matrix().value();
  char buf[64];
  for (std::size_t r = 0; r < table.tokens().size(); ++r) {
    out += table.tokens()[r];
    for (std::size_t j = 0; j < table.dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m.at(r, j));
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> segment(std::string_view token, const Vocabulary& vocab) {
  if (token.empty()) throw ArgumentError("cannot segment an empty token");
  if (vocab.count(std::string(token))) return {std::string(token)};
  // Code point boundaries, so pieces never split a multi-byte character.
  std::vector<std::size_t> bounds{0};
  for (const auto& cp : utf8::code_points(token)) bounds.push_back(bounds.back() + cp.size());
  std::vector<std::string> pieces;
  std::size_t i = 0;
  while (i + 1 < bounds.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = bounds.size() - 1; j > i + 1; --j) {
      if (vocab.count(std::string(token.substr(bounds[i], bounds[j] - bounds[i])))) {
        next = j;
        break;
      }
    }
    pieces.emplace_back(token.substr(bounds[i], bounds[next] - bounds[i]));
    i = next;
  }
  return pieces;
}

std::vector<double> lookup(std::string_view token, const EmbeddingTable& table) {
  const auto rows = table.rows_for(token);
  const Tensor& m = table.matrix().value();
  std::vector<double> out(table.dim(), 0.0);
  for (auto r : rows) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += m.at(r, j);
  }
  if (rows.size() > 1) {
    for (auto& v : out) v /= static_cast<double>(rows.size());
  }
  return out;
}

Var lookup(Graph& g, std::string_view token, EmbeddingTable& table) {
  if (!table.trainable()) return g.constant(Tensor::vector(lookup(token, table)));
  const auto rows = table.rows_for(token);
  Var m = g.param(table.matrix());
  const std::size_t d = table.dim();
  Var acc = g.slice(m, rows[0] * d, d);
  for (std::size_t k = 1; k < rows.size(); ++k) acc = g.add(acc, g.slice(m, rows[k] * d, d));
  if (rows.size() > 1) acc = scale(g, acc, 1.0 / static_cast<double>(rows.size()));
  return acc;
}

}  // namespace metatag
