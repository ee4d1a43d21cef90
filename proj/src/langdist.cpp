#include "metatag/langdist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "metatag/corpus.hpp"
#include "metatag/error.hpp"
#include "metatag/utf8.hpp"

namespace metatag {

UnigramLM::UnigramLM(std::string language, std::span<const std::string> tokens)
    : language_(std::move(language)) {
  if (tokens.empty()) throw ArgumentError("cannot train a unigram model on an empty corpus");
  for (const auto& t : tokens) ++counts_[t];
  total_ = tokens.size();
}

double UnigramLM::probability(const std::string& token) const {
  auto it = counts_.find(token);
  const double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
  return (count + 1.0) / static_cast<double>(total_ + counts_.size() + 1);
}

double UnigramLM::unk_probability() const {
  return 1.0 / static_cast<double>(total_ + counts_.size() + 1);
}

UnigramLM train_unigram(std::span<const std::string> tokens, std::string language) {
  return UnigramLM(std::move(language), tokens);
}

double perplexity(const std::function<double(const std::string&)>& probability,
                  std::span<const std::string> text) {
  if (text.empty()) throw ArgumentError("perplexity of an empty text");
  // Extended-precision accumulation; powers of two come back exact.
  long double bits = 0.0L;
  for (const auto& w : text) bits -= std::log2(static_cast<long double>(probability(w)));
  return static_cast<double>(std::exp2(bits / static_cast<long double>(text.size())));
}

double perplexity(const UnigramLM& lm, std::span<const std::string> text) {
  return perplexity([&lm](const std::string& w) { return lm.probability(w); }, text);
}

namespace {

const std::string kBoundary = "\x02";

std::string history_key(const std::vector<std::string>& chars, std::size_t pos, std::size_t length) {
  std::string key;
  for (std::size_t k = length; k > 0; --k) {
    key += pos >= k ? chars[pos - k] : kBoundary;
  }
  return key;
}

std::vector<std::string> checked_code_points(std::string_view text) {
  if (utf8::find_invalid(text)) throw ArgumentError("character LM input is not valid UTF-8");
  return utf8::code_points(text);
}

}  // namespace

CharNgramLM::CharNgramLM(std::string_view corpus, std::size_t order) : order_(order) {
  if (order == 0) throw ArgumentError("character LM order must be at least 1");
  const auto chars = checked_code_points(corpus);
  if (chars.empty()) throw ArgumentError("character LM needs a non-empty corpus");
  for (std::size_t i = 0; i < chars.size(); ++i) {
    alphabet_.insert(chars[i]);
    const std::string h = history_key(chars, i, order_ - 1);
    ++history_counts_[h];
    ++ngram_counts_[h + '\x1f' + chars[i]];
  }
}

double CharNgramLM::perplexity(std::string_view text) const {
  const auto chars = checked_code_points(text);
  if (chars.empty()) throw ArgumentError("perplexity of an empty text");
  const double v = static_cast<double>(alphabet_.size());
  double bits = 0.0;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const std::string h = history_key(chars, i, order_ - 1);
    auto hc = history_counts_.find(h);
    auto nc = ngram_counts_.find(h + '\x1f' + chars[i]);
    const double hist = hc == history_counts_.end() ? 0.0 : static_cast<double>(hc->second);
    const double joint = nc == ngram_counts_.end() ? 0.0 : static_cast<double>(nc->second);
    bits -= std::log2((joint + 1.0) / (hist + v + 1.0));
  }
  return std::exp2(bits / static_cast<double>(chars.size()));
}

double charlm_perplexity(std::string_view l1_corpus, std::string_view l2_text, std::size_t order) {
  if (l2_text.empty()) throw ArgumentError("perplexity of an empty text");
  return CharNgramLM(l1_corpus, order).perplexity(l2_text);
}

double vocab_overlap(std::size_t shared_12, std::size_t shared_21, std::size_t pooled_1,
                     std::size_t pooled_2) {
  const std::size_t denom = std::min(pooled_1, pooled_2);
  if (denom == 0) throw ArgumentError("vocabulary overlap is undefined when a language shares no words");
  return static_cast<double>(shared_12 + shared_21) / (2.0 * static_cast<double>(denom));
}

TypeSet vocabulary_types(std::span<const std::string> tokens) {
  TypeSet out;
  for (const auto& t : tokens) out.insert(utf8::to_lower(t));
  return out;
}

namespace {

std::size_t intersection_size(const TypeSet& a, const TypeSet& b) {
  std::size_t n = 0;
  for (const auto& w : a) n += b.count(w);
  return n;
}

std::size_t pooled_shared(const std::map<std::string, TypeSet>& pool, const std::string& lang) {
  const TypeSet& own = pool.at(lang);
  std::size_t n = 0;
  for (const auto& w : own) {
    for (const auto& [other, types] : pool) {
      if (other != lang && types.count(w)) {
        ++n;
        break;
      }
    }
  }
  return n;
}

}  // namespace

double vocab_overlap(const std::map<std::string, TypeSet>& pool, const std::string& l1,
                     const std::string& l2) {
  if (!pool.count(l1) || !pool.count(l2)) throw ArgumentError("language missing from the pool");
  const std::size_t w = intersection_size(pool.at(l1), pool.at(l2));
  return vocab_overlap(w, w, pooled_shared(pool, l1), pooled_shared(pool, l2));
}

std::string to_string(Measure m) {
  switch (m) {
    case Measure::kPerplexity: return "dP";
    case Measure::kCharPerplexity: return "dPF";
    case Measure::kVocab: return "dV";
    case Measure::kVocabTrain: return "dVT";
  }
  return "?";
}

Measure parse_measure(const std::string& name) {
  if (name == "dP") return Measure::kPerplexity;
  if (name == "dPF") return Measure::kCharPerplexity;
  if (name == "dV") return Measure::kVocab;
  if (name == "dVT") return Measure::kVocabTrain;
  throw ConfigError("unknown distance measure '" + name + "' (expected dP, dPF, dV or dVT)");
}

bool lower_is_closer(Measure m) { return m == Measure::kPerplexity || m == Measure::kCharPerplexity; }

std::vector<std::string> Ranking::languages() const {
  std::vector<std::string> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

double Ranking::rank_of(const std::string& language) const {
  std::size_t start = 1;
  for (const auto& g : groups) {
    if (std::find(g.begin(), g.end(), language) != g.end()) {
      return static_cast<double>(start) + (static_cast<double>(g.size()) - 1.0) / 2.0;
    }
    start += g.size();
  }
  throw ArgumentError("language '" + language + "' is not ranked for " + target);
}

Ranking rank_by_measure(const DistanceMatrix& m, const std::string& target) {
  std::set<std::string> languages;
  for (const auto& [pair, v] : m.values) {
    languages.insert(pair.first);
    languages.insert(pair.second);
  }
  if (!languages.count(target)) throw ArgumentError("no distances for target '" + target + "'");
  std::vector<std::pair<std::string, double>> entries;
  for (const auto& aux : languages) {
    if (aux == target) continue;
    auto it = m.values.find({target, aux});
    if (it == m.values.end()) {
      throw ArgumentError(to_string(m.measure) + " lacks the pair (" + target + ", " + aux + ")");
    }
    entries.emplace_back(aux, it->second);
  }
  const bool ascending = lower_is_closer(m.measure);
  std::stable_sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
    return ascending ? a.second < b.second : a.second > b.second;
  });
  Ranking r;
  r.target = target;
  double anchor = 0.0;
  for (const auto& [lang, value] : entries) {
    if (!r.groups.empty() && std::abs(value - anchor) <= kTieTolerance) {
      r.groups.back().push_back(lang);
    } else {
      r.groups.push_back({lang});
      anchor = value;
    }
  }
  for (auto& g : r.groups) std::sort(g.begin(), g.end());
  return r;
}

Ranking vote(std::span<const Ranking> rankings) {
  if (rankings.empty()) throw ArgumentError("voting needs at least one ranking");
  auto reference = rankings.front().languages();
  std::sort(reference.begin(), reference.end());
  for (const auto& r : rankings) {
    auto langs = r.languages();
    std::sort(langs.begin(), langs.end());
    if (langs != reference || r.target != rankings.front().target) {
      throw ArgumentError("rankings for voting cover different language sets");
    }
  }
  // Position span [first, last] of each language in each ranking.
  struct Span {
    std::size_t first, last;
  };
  std::map<std::string, std::vector<Span>> spans;
  std::map<std::string, double> mean_rank;
  for (const auto& r : rankings) {
    std::size_t start = 1;
    for (const auto& g : r.groups) {
      for (const auto& l : g) spans[l].push_back({start, start + g.size() - 1});
      start += g.size();
    }
  }
  for (const auto& [lang, ss] : spans) {
    double total = 0.0;
    for (const auto& s : ss) total += static_cast<double>(s.first + s.last) / 2.0;
    mean_rank[lang] = total / static_cast<double>(ss.size());
  }

  Ranking out;
  out.target = rankings.front().target;
  std::vector<std::string> remaining = reference;
  std::size_t position = 1;
  while (!remaining.empty()) {
    std::map<std::string, std::size_t> votes;
    std::size_t top = 0;
    for (const auto& l : remaining) {
      std::size_t v = 0;
      for (const auto& s : spans[l]) v += s.first <= position && position <= s.last;
      votes[l] = v;
      top = std::max(top, v);
    }
    double best_mean = INFINITY;
    for (const auto& l : remaining) {
      if (votes[l] == top) best_mean = std::min(best_mean, mean_rank[l]);
    }
    std::vector<std::string> group;
    for (const auto& l : remaining) {
      if (votes[l] == top && std::abs(mean_rank[l] - best_mean) <= kTieTolerance) group.push_back(l);
    }
    for (const auto& l : group) remaining.erase(std::find(remaining.begin(), remaining.end(), l));
    position += group.size();
    out.groups.push_back(std::move(group));
  }
  return out;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ArgumentError("rank correlation is undefined for a constant ranking");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("rank correlation over vectors of different length");
  if (x.size() < 2) throw ArgumentError("rank correlation needs at least two items");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

double spearman(const Ranking& a, const Ranking& b) {
  auto la = a.languages();
  auto lb = b.languages();
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  if (la != lb) throw ArgumentError("rankings cover different languages");
  if (la.size() < 2) throw ArgumentError("rank correlation needs at least two items");
  std::vector<double> ra, rb;
  for (const auto& l : la) {
    ra.push_back(a.rank_of(l));
    rb.push_back(b.rank_of(l));
  }
  return pearson(ra, rb);
}

std::string format_rankings(std::span<const Ranking> rankings,
                            std::span<const std::string> column_labels) {
  std::string out = "rank";
  std::size_t rows = 0;
  std::vector<std::vector<std::string>> columns;
  for (std::size_t c = 0; c < rankings.size(); ++c) {
    out += "\t" + (c < column_labels.size() ? column_labels[c] : rankings[c].target);
    std::vector<std::string> col;
    for (const auto& g : rankings[c].groups) {
      for (const auto& l : g) col.push_back(g.size() > 1 ? l + "*" : l);
    }
    rows = std::max(rows, col.size());
    columns.push_back(std::move(col));
  }
  out += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    out += std::to_string(r + 1);
    for (const auto& col : columns) out += "\t" + (r < col.size() ? col[r] : std::string("-"));
    out += "\n";
  }
  return out;
}

std::vector<LabeledRanking> parse_rankings(std::string_view text) {
  std::vector<LabeledRanking> out;
  for (const auto& block : read_column_blocks(text)) {
    for (const auto& line : block) {
      if (line.fields.front()[0] == '#') continue;
      if (line.fields.size() < 3) throw ParseError("ranking row needs target, measure and languages", line.line_number);
      LabeledRanking lr;
      lr.ranking.target = line.fields[0];
      lr.measure = line.fields[1];
      bool prev_starred = false;
      for (std::size_t i = 2; i < line.fields.size(); ++i) {
        std::string lang = line.fields[i];
        const bool starred = lang.size() > 1 && lang.back() == '*';
        if (starred) lang.pop_back();
        if (starred && prev_starred) {
          lr.ranking.groups.back().push_back(lang);
        } else {
          lr.ranking.groups.push_back({lang});
        }
        prev_starred = starred;
      }
      out.push_back(std::move(lr));
    }
  }
  return out;
}

std::string format_distance_matrix(const DistanceMatrix& m) {
  std::string out;
  char buf[64];
  for (const auto& [pair, v] : m.values) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out += to_string(m.measure) + "\t" + pair.first + "\t" + pair.second + "\t" + std::string(buf, ptr) + "\n";
  }
  return out;
}

std::vector<DistanceMatrix> parse_distance_matrices(std::string_view text) {
  std::vector<DistanceMatrix> out;
  for (const auto& block : read_column_blocks(text)) {
    for (const auto& line : block) {
      if (line.fields.front()[0] == '#') continue;
      if (line.fields.size() != 4) throw ParseError("distance row needs measure, L1, L2, value", line.line_number);
      const Measure m = parse_measure(line.fields[0]);
      double v = 0.0;
      const auto& f = line.fields[3];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) throw ParseError("bad distance value '" + f + "'", line.line_number);
      auto it = std::find_if(out.begin(), out.end(), [&](const DistanceMatrix& d) { return d.measure == m; });
      if (it == out.end()) {
        out.push_back(DistanceMatrix{m, {}});
        it = out.end() - 1;
      }
      it->values[{line.fields[1], line.fields[2]}] = v;
    }
  }
  return out;
}

Recommendation advise(const AdviceContext& context) {
  if (context.can_train_embeddings) {
    return {Advice::kMetaEmbeddings,
            "train several monolingual embeddings and combine them with attention-based meta-embeddings"};
  }
  if (context.has_multilingual) {
    return {Advice::kMonoPlusMultilingual,
            "combine the monolingual embeddings with high-quality multilingual embeddings (mono + multilingual)"};
  }
  std::string text = "pick the auxiliary language ranked closest by the combined voting distance (dVOTE)";
  if (!context.distances_available) text += "; compute the dP, dPF, dV and dVT distances first";
  return {Advice::kDistanceRanking, text};
}

}  // namespace metatag
