#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metatag/corpus.hpp"

namespace metatag {

enum class Task { kNer, kPos };
std::string to_string(Task task);
Task parse_task(const std::string& name);

using TagSequences = std::vector<std::vector<std::string>>;

struct SpanCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct SpanF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<SpanCounts> per_sentence;
};

struct Span {
  std::string type;
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  friend bool operator==(const Span&, const Span&) = default;
};

// Entity spans of an IOB2 sequence. An I- tag that does not continue a span
// of its type opens a new one.
std::vector<Span> extract_spans(std::span<const std::string> tags);

SpanF1 span_f1(const Dataset& gold, const TagSequences& predicted);
// F1 from raw counts; 0 when precision + recall is 0.
double f1_from_counts(const SpanCounts& counts);

struct TokenAccuracy {
  double accuracy = 0.0;
  std::vector<std::size_t> correct;  // per sentence
  std::vector<std::size_t> total;
};
TokenAccuracy token_accuracy(const Dataset& gold, const TagSequences& predicted);

// Span F1 for NER, token accuracy for POS, both in [0, 1].
double task_metric(Task task, const Dataset& gold, const TagSequences& predicted);
// Per-sentence scores used as permutation-test units: sentence F1 for NER
// (1 when the sentence has no gold and no predicted spans), sentence
// accuracy for POS.
std::vector<double> per_sentence_scores(Task task, const Dataset& gold,
                                        const TagSequences& predicted);

struct RunResult {
  std::uint64_t seed = 0;
  double dev_metric = 0.0;
  double test_metric = 0.0;
  std::vector<double> per_sentence;  // test units
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
  std::string formatted;  // "80.00 ± 1.41"
};
Aggregate aggregate(std::span<const double> values);
Aggregate aggregate(std::span<const RunResult> runs);  // over test_metric

// Index of the run with the median dev metric (lower median for even counts,
// ties by position).
std::size_t median_dev_run(std::span<const RunResult> runs);

enum class PermutationMode { kAuto, kExact, kSampled };

struct PermutationResult {
  double p_value = 1.0;
  std::uint64_t permutations = 0;  // total flips counted, identity included
  bool exact = false;
};

inline constexpr std::uint64_t kDefaultPermutations = std::uint64_t{1} << 20;

// One-sided paired sign-flip test of mean(a - b) > 0. Exhaustive when
// 2^n <= budget (kAuto), otherwise `budget` seeded random flips plus the
// identity.
PermutationResult paired_permutation_test(std::span<const double> a, std::span<const double> b,
                                          std::uint64_t budget = kDefaultPermutations,
                                          std::uint64_t seed = 1,
                                          PermutationMode mode = PermutationMode::kAuto);

enum class Correction { kBonferroni, kFisher };
Correction parse_correction(const std::string& name);

struct CorrectionResult {
  std::vector<bool> reject;  // per comparison
  double combined_p = 1.0;   // Fisher's combined p over all comparisons
  double statistic = 0.0;    // -2 sum ln p
  std::size_t replicated = 0;  // number of rejected comparisons
};

// Bonferroni rejects p <= alpha / k. Fisher combines -2 sum ln p against
// chi-square with 2k degrees of freedom and, per comparison, applies the
// partial-conjunction step-down: the u smallest p-values are rejected for the
// largest u whose Fisher combination of the k-u+1 largest p-values stays
// <= alpha for every u' <= u.
CorrectionResult correct_multiplicity(std::span<const double> p_values, double alpha,
                                      Correction method = Correction::kFisher);

// Upper tail of chi-square with 2k degrees of freedom.
double chi_square_even_sf(double x, std::size_t k);

struct SignificanceReport {
  std::string system_a;
  std::string system_b;
  double p_value = 1.0;
  bool significant = false;
  std::uint64_t permutations = 0;
};

// Rows = settings, columns = languages, "mean ± std" cells plus a marker
// column per language ("*" when significant).
struct ReportCell {
  std::string setting;
  std::string language;
  Aggregate value;
  bool significant = false;
};
std::string format_report(std::span<const ReportCell> cells);

}  // namespace metatag
