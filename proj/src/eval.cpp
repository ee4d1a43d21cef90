#include "metatag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "metatag/error.hpp"
#include "metatag/rng.hpp"

namespace metatag {

std::string to_string(Task task) { return task == Task::kNer ? "ner" : "pos"; }

Task parse_task(const std::string& name) {
  if (name == "ner") return Task::kNer;
  if (name == "pos") return Task::kPos;
  throw ConfigError("unknown task '" + name + "' (expected ner or pos)");
}

std::vector<Span> extract_spans(std::span<const std::string> tags) {
  std::vector<Span> spans;
  bool open = false;
  Span current;
  auto close = [&](std::size_t end) {
    if (open) {
      current.end = end;
      spans.push_back(current);
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    const bool is_b = tag.size() >= 2 && tag[0] == 'B' && tag[1] == '-';
    const bool is_i = tag.size() >= 2 && tag[0] == 'I' && tag[1] == '-';
    if (!is_b && !is_i) {
      close(i);
      continue;
    }
    const std::string type = tag.substr(2);
    if (is_i && open && current.type == type) continue;
    close(i);
    current = Span{type, i, i};
    open = true;
  }
  close(tags.size());
  return spans;
}

namespace {

void check_shapes(const Dataset& gold, const TagSequences& predicted) {
  if (gold.size() != predicted.size()) {
    throw ArgumentError("gold has " + std::to_string(gold.size()) + " sentences, predictions " +
                        std::to_string(predicted.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].tags.size() != predicted[i].size()) {
      throw ArgumentError("sentence " + std::to_string(i + 1) + ": " +
                          std::to_string(gold[i].tags.size()) + " gold tags vs " +
                          std::to_string(predicted[i].size()) + " predicted");
    }
  }
}

SpanCounts count_spans(std::span<const std::string> gold, std::span<const std::string> pred) {
  const auto g = extract_spans(gold);
  const auto p = extract_spans(pred);
  SpanCounts c;
  for (const auto& s : p) {
    if (std::find(g.begin(), g.end(), s) != g.end()) ++c.tp;
  }
  c.fp = p.size() - c.tp;
  c.fn = g.size() - c.tp;
  return c;
}

}  // namespace

double f1_from_counts(const SpanCounts& c) {
  const double p = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

SpanF1 span_f1(const Dataset& gold, const TagSequences& predicted) {
  check_shapes(gold, predicted);
  SpanF1 out;
  SpanCounts total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto c = count_spans(gold[i].tags, predicted[i]);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    out.per_sentence.push_back(c);
  }
  out.precision = total.tp + total.fp ? static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fp) : 0.0;
  out.recall = total.tp + total.fn ? static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fn) : 0.0;
  out.f1 = f1_from_counts(total);
  return out;
}

TokenAccuracy token_accuracy(const Dataset& gold, const TagSequences& predicted) {
  check_shapes(gold, predicted);
  TokenAccuracy out;
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::size_t c = 0;
    for (std::size_t t = 0; t < predicted[i].size(); ++t) c += gold[i].tags[t] == predicted[i][t];
    out.correct.push_back(c);
    out.total.push_back(predicted[i].size());
    correct += c;
    total += predicted[i].size();
  }
  if (total == 0) throw ArgumentError("token accuracy is undefined for an empty dataset");
  out.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return out;
}

double task_metric(Task task, const Dataset& gold, const TagSequences& predicted) {
  return task == Task::kNer ? span_f1(gold, predicted).f1 : token_accuracy(gold, predicted).accuracy;
}

std::vector<double> per_sentence_scores(Task task, const Dataset& gold,
                                        const TagSequences& predicted) {
  std::vector<double> out;
  if (task == Task::kNer) {
    for (const auto& c : span_f1(gold, predicted).per_sentence) {
      out.push_back(c.tp + c.fp + c.fn == 0 ? 1.0 : f1_from_counts(c));
    }
  } else {
    const auto acc = token_accuracy(gold, predicted);
    for (std::size_t i = 0; i < acc.correct.size(); ++i) {
      out.push_back(static_cast<double>(acc.correct[i]) / static_cast<double>(acc.total[i]));
    }
  }
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.size() < 2) throw ArgumentError("aggregate needs at least 2 runs");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (double v : sorted) total += v;
  const double mean = total / n;
  double sq = 0.0;
  for (double v : sorted) sq += (v - mean) * (v - mean);
  Aggregate out;
  out.mean = mean;
  out.stddev = std::sqrt(sq / (n - 1.0));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", out.mean, out.stddev);
  out.formatted = buf;
  return out;
}

Aggregate aggregate(std::span<const RunResult> runs) {
  std::vector<double> values;
  for (const auto& r : runs) values.push_back(r.test_metric);
  return aggregate(values);
}

std::size_t median_dev_run(std::span<const RunResult> runs) {
  if (runs.empty()) throw ArgumentError("no runs to pick a median from");
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].dev_metric < runs[b].dev_metric; });
  return order[(runs.size() - 1) / 2];
}

PermutationResult paired_permutation_test(std::span<const double> a, std::span<const double> b,
                                          std::uint64_t budget, std::uint64_t seed,
                                          PermutationMode mode) {
  if (a.size() != b.size()) {
    throw ArgumentError("paired scores differ in length: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
  if (a.empty()) throw ArgumentError("permutation test needs at least one paired unit");
  if (budget == 0) throw ArgumentError("permutation budget must be positive");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  double observed = 0.0, magnitude = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    observed += diff[i];
    magnitude += std::abs(diff[i]);
  }
  // Sums stand in for means (same n); ties are judged up to rounding.
  const double threshold = observed - 1e-12 * magnitude;
  bool exact = false;
  if (mode == PermutationMode::kExact) {
    if (n > 30) throw ArgumentError("exact enumeration over 2^" + std::to_string(n) + " flips is infeasible");
    exact = true;
  } else if (mode == PermutationMode::kAuto) {
    exact = n < 64 && (std::uint64_t{1} << n) <= budget;
  }
  PermutationResult out;
  out.exact = exact;
  std::uint64_t hits = 0;
  if (exact) {
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? -diff[i] : diff[i];
      hits += s >= threshold;
    }
    out.permutations = total;
  } else {
    Rng rng(seed);
    hits = 1;  // identity flip
    for (std::uint64_t draw = 0; draw < budget; ++draw) {
      double s = 0.0;
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) bits = rng.next();
        s += (bits >> (i % 64) & 1) ? -diff[i] : diff[i];
      }
      hits += s >= threshold;
    }
    out.permutations = budget + 1;
  }
  out.p_value = static_cast<double>(hits) / static_cast<double>(out.permutations);
  return out;
}

Correction parse_correction(const std::string& name) {
  if (name == "bonferroni") return Correction::kBonferroni;
  if (name == "fisher") return Correction::kFisher;
  throw ConfigError("unknown correction '" + name + "' (expected bonferroni or fisher)");
}

double chi_square_even_sf(double x, std::size_t k) {
  if (k == 0) throw ArgumentError("chi-square needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  const double half = x / 2.0;
  double term = 1.0, total = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    term *= half / static_cast<double>(j);
    total += term;
  }
  return std::min(1.0, std::exp(-half + std::log(total)));
}

CorrectionResult correct_multiplicity(std::span<const double> p_values, double alpha,
                                      Correction method) {
  if (p_values.empty()) throw ArgumentError("no p-values to correct");
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("p-value " + std::to_string(p) + " outside (0, 1]");
  }
  const std::size_t k = p_values.size();
  CorrectionResult out;
  out.reject.assign(k, false);
  for (double p : p_values) out.statistic -= 2.0 * std::log(p);
  out.combined_p = chi_square_even_sf(out.statistic, k);
  if (method == Correction::kBonferroni) {
    for (std::size_t i = 0; i < k; ++i) out.reject[i] = p_values[i] <= alpha / static_cast<double>(k);
  } else {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
    // exp(log p) can land an ulp above p; keep k = 1 identical to the raw test
    const double threshold = alpha * (1.0 + 1e-12);
    std::size_t accepted = 0;
    for (std::size_t u = 1; u <= k; ++u) {
      double stat = 0.0;
      for (std::size_t i = u - 1; i < k; ++i) stat -= 2.0 * std::log(p_values[order[i]]);
      if (chi_square_even_sf(stat, k - u + 1) > threshold) break;
      accepted = u;
    }
    for (std::size_t i = 0; i < accepted; ++i) out.reject[order[i]] = true;
  }
  out.replicated = static_cast<std::size_t>(std::count(out.reject.begin(), out.reject.end(), true));
  return out;
}

std::string format_report(std::span<const ReportCell> cells) {
  std::vector<std::string> settings, languages;
  std::map<std::pair<std::string, std::string>, const ReportCell*> index;
  for (const auto& c : cells) {
    if (std::find(settings.begin(), settings.end(), c.setting) == settings.end()) settings.push_back(c.setting);
    if (std::find(languages.begin(), languages.end(), c.language) == languages.end()) languages.push_back(c.language);
    index[{c.setting, c.language}] = &c;
  }
  std::string out = "setting";
  for (const auto& l : languages) out += "\t" + l + "\tsig";
  out += "\n";
  for (const auto& s : settings) {
    out += s;
    for (const auto& l : languages) {
      auto it = index.find({s, l});
      if (it == index.end()) {
        out += "\t-\t";
      } else {
        out += "\t" + it->second->value.formatted + "\t" + (it->second->significant ? "*" : "");
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace metatag
