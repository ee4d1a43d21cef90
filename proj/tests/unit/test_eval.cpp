#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "metatag/corpus.hpp"
#include "metatag/error.hpp"
#include "metatag/eval.hpp"
#include "metatag/rng.hpp"

using namespace metatag;

namespace {

Dataset one_sentence(std::vector<std::string> tags) {
  std::vector<std::string> tokens(tags.size(), "w");
  return Dataset({TaggedSentence{tokens, tags}});
}

}  // namespace

TEST_CASE("span extraction") {
  std::vector<std::string> tags{"B-PER", "I-PER", "O", "B-LOC", "I-ORG", "I-ORG", "B-LOC", "I-LOC"};
  auto spans = extract_spans(tags);
  REQUIRE(spans.size() == 4);
  CHECK(spans[0] == Span{"PER", 0, 2});
  CHECK(spans[1] == Span{"LOC", 3, 4});
  CHECK(spans[2] == Span{"ORG", 4, 6});
  CHECK(spans[3] == Span{"LOC", 6, 8});
}

TEST_CASE("span F1 examples") {
  auto gold = one_sentence({"O", "B-PER", "I-PER", "O", "B-LOC", "O"});
  auto perfect = span_f1(gold, {gold[0].tags});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  auto half = span_f1(gold, {{"O", "B-PER", "I-PER", "O", "O", "B-LOC"}});
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f1 == 0.5);
  REQUIRE(half.per_sentence.size() == 1);
  CHECK(half.per_sentence[0].tp == 1);
  CHECK(half.per_sentence[0].fp == 1);
  CHECK(half.per_sentence[0].fn == 1);

  auto none = span_f1(gold, {std::vector<std::string>(6, "O")});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  CHECK_THROWS_AS(span_f1(gold, {{"O"}}), ArgumentError);
  CHECK_THROWS_AS(span_f1(gold, {}), ArgumentError);
}

TEST_CASE("span F1 ignores sentence order") {
  Dataset gold({{{"a", "b"}, {"B-PER", "O"}}, {{"c", "d", "e"}, {"B-LOC", "I-LOC", "B-ORG"}},
                {{"f"}, {"O"}}});
  TagSequences pred{{"B-PER", "B-LOC"}, {"B-LOC", "I-LOC", "O"}, {"B-MISC"}};
  Dataset rev({gold[2], gold[0], gold[1]});
  TagSequences rev_pred{pred[2], pred[0], pred[1]};
  CHECK(span_f1(gold, pred).f1 == span_f1(rev, rev_pred).f1);
}

TEST_CASE("token accuracy examples") {
  auto gold = one_sentence({"DET", "NOUN", "VERB", "PUNCT"});
  CHECK(token_accuracy(gold, {gold[0].tags}).accuracy == 1.0);
  auto acc = token_accuracy(gold, {{"DET", "NOUN", "NOUN", "PUNCT"}});
  CHECK(acc.accuracy == 0.75);
  CHECK(acc.correct == std::vector<std::size_t>{3});
  CHECK(acc.total == std::vector<std::size_t>{4});
  CHECK_THROWS_AS(token_accuracy(Dataset{}, {}), ArgumentError);
  CHECK_THROWS_AS(token_accuracy(gold, {{"DET"}}), ArgumentError);
}

TEST_CASE("per-sentence scores") {
  Dataset gold({{{"a", "b"}, {"B-PER", "O"}}, {{"c"}, {"O"}}});
  auto s = per_sentence_scores(Task::kNer, gold, {{"B-PER", "O"}, {"O"}});
  CHECK(s == std::vector<double>{1.0, 1.0});
  auto t = per_sentence_scores(Task::kNer, gold, {{"O", "O"}, {"B-LOC"}});
  CHECK(t == std::vector<double>{0.0, 0.0});
  Dataset pos({{{"a", "b"}, {"X", "Y"}}});
  CHECK(per_sentence_scores(Task::kPos, pos, {{"X", "X"}}) == std::vector<double>{0.5});
}

TEST_CASE("aggregate examples") {
  std::vector<double> flat{80, 80, 80, 80, 80};
  CHECK(aggregate(flat).formatted == "80.00 ± 0.00");
  std::vector<double> two{79, 81};
  auto a = aggregate(two);
  CHECK(a.formatted == "80.00 ± 1.41");
  CHECK(std::abs(a.stddev - std::sqrt(2.0)) <= 1e-12);
  std::vector<double> one{80};
  CHECK_THROWS_AS(aggregate(one), ArgumentError);
}

TEST_CASE("aggregate is order-free and matches a two-pass oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + rng.below(8));
    for (auto& x : v) x = rng.uniform(60, 99);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    auto a = aggregate(v);
    CHECK(std::abs(a.mean - mean) <= 1e-12);
    CHECK(std::abs(a.stddev - sd) <= 1e-12);
    auto shuffled = v;
    rng.shuffle(std::span<double>(shuffled));
    auto b = aggregate(shuffled);
    CHECK(b.formatted == a.formatted);
    CHECK(b.mean == a.mean);
    CHECK(b.stddev == a.stddev);
  }
}

TEST_CASE("median dev run") {
  std::vector<RunResult> runs{{1, 90, 0, {}}, {2, 70, 0, {}}, {3, 80, 0, {}}, {4, 85, 0, {}},
                              {5, 60, 0, {}}};
  CHECK(runs[median_dev_run(runs)].seed == 3);
  runs.pop_back();
  CHECK(runs[median_dev_run(runs)].seed == 3);
}

TEST_CASE("permutation test examples") {
  std::vector<double> a{0.5, 0.7, 0.9};
  auto same = paired_permutation_test(a, a);
  CHECK(same.p_value == 1.0);
  CHECK(same.exact);

  std::vector<double> x(20), y(20, 0.0);
  for (std::size_t i = 0; i < 20; ++i) x[i] = 0.01 * static_cast<double>(i + 1);
  auto r = paired_permutation_test(x, y);
  CHECK(r.exact);
  CHECK(r.permutations == (std::uint64_t{1} << 20));
  CHECK(r.p_value == 1.0 / 1048576.0);

  auto swapped = paired_permutation_test(y, x);
  CHECK(swapped.p_value >= 1.0 - r.p_value);

  std::vector<double> short_b{1.0};
  CHECK_THROWS_AS(paired_permutation_test(a, short_b), ArgumentError);
}

TEST_CASE("permutation p-values are bounded and deterministic") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 25 + rng.below(10);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    auto r1 = paired_permutation_test(a, b, 4096, 5);
    auto r2 = paired_permutation_test(a, b, 4096, 5);
    CHECK_FALSE(r1.exact);
    CHECK(r1.permutations == 4097);
    CHECK(r1.p_value == r2.p_value);
    CHECK(r1.p_value >= 1.0 / static_cast<double>(r1.permutations));
    CHECK(r1.p_value <= 1.0);
  }
}

TEST_CASE("exact and sampled paths agree within three sigma") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 8 + rng.below(9);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform() + 0.1;
      b[i] = rng.uniform();
    }
    auto exact = paired_permutation_test(a, b, kDefaultPermutations, 1, PermutationMode::kExact);
    const std::uint64_t budget = 20000;
    auto sampled =
        paired_permutation_test(a, b, budget, 100 + trial, PermutationMode::kSampled);
    const double p = exact.p_value;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(budget));
    INFO("n=" << n << " exact=" << p << " sampled=" << sampled.p_value);
    CHECK(std::abs(sampled.p_value - p) <= 3 * sigma + 1.0 / static_cast<double>(budget));
  }
}

TEST_CASE("bonferroni and fisher corrections") {
  std::vector<double> p{0.01, 0.04};
  auto bon = correct_multiplicity(p, 0.05, Correction::kBonferroni);
  CHECK(bon.reject == std::vector<bool>{true, false});

  std::vector<double> ones{1.0, 1.0};
  auto fis = correct_multiplicity(ones, 0.05, Correction::kFisher);
  CHECK(fis.statistic == 0.0);
  CHECK(fis.combined_p == 1.0);
  CHECK(fis.reject == std::vector<bool>{false, false});

  for (double raw : {0.01, 0.05, 0.2}) {
    std::vector<double> single{raw};
    for (auto method : {Correction::kBonferroni, Correction::kFisher}) {
      auto r = correct_multiplicity(single, 0.05, method);
      CHECK(r.reject[0] == (raw <= 0.05));
    }
    CHECK(std::abs(correct_multiplicity(single, 0.05).combined_p - raw) <= 1e-12);
  }

  std::vector<double> empty;
  CHECK_THROWS_AS(correct_multiplicity(empty, 0.05), ArgumentError);
  std::vector<double> zero{0.0};
  CHECK_THROWS_AS(correct_multiplicity(zero, 0.05), ArgumentError);
}

TEST_CASE("fisher combination against hand values") {
  // k = 2: sf(x; 4 dof) = e^{-x/2} (1 + x/2)
  std::vector<double> p{0.01, 0.04};
  auto r = correct_multiplicity(p, 0.05, Correction::kFisher);
  const double x = -2 * (std::log(0.01) + std::log(0.04));
  CHECK(std::abs(r.statistic - x) <= 1e-12);
  CHECK(std::abs(r.combined_p - std::exp(-x / 2) * (1 + x / 2)) <= 1e-12);
  // partial conjunction: u=1 uses both p-values (combined ~0.0035), u=2 uses
  // only the largest (0.04); both pass
  CHECK(r.reject == std::vector<bool>{true, true});
  CHECK(r.replicated == 2);

  std::vector<double> mixed{0.001, 0.3, 0.6};
  auto m = correct_multiplicity(mixed, 0.05, Correction::kFisher);
  CHECK(m.reject == std::vector<bool>{true, false, false});

  CHECK(std::abs(chi_square_even_sf(0.0, 3) - 1.0) <= 1e-15);
  CHECK(std::abs(chi_square_even_sf(2.0, 1) - std::exp(-1.0)) <= 1e-15);
}

TEST_CASE("parse helpers") {
  CHECK(parse_task("ner") == Task::kNer);
  CHECK(parse_task("pos") == Task::kPos);
  CHECK_THROWS_AS(parse_task("chunking"), ConfigError);
  CHECK(parse_correction("fisher") == Correction::kFisher);
  CHECK(parse_correction("bonferroni") == Correction::kBonferroni);
  CHECK_THROWS_AS(parse_correction("holm"), ConfigError);
}

TEST_CASE("report layout") {
  std::vector<double> de{80, 82}, en{90, 90};
  std::vector<ReportCell> cells{{"Mono", "De", aggregate(de), false},
                                {"Mono", "En", aggregate(en), false},
                                {"Meta", "De", aggregate(en), true}};
  auto text = format_report(cells);
  CHECK(text.substr(0, text.find('\n')) == "setting\tDe\tsig\tEn\tsig");
  CHECK(text.find("Mono\t81.00 ± 1.41\t\t90.00 ± 0.00\t") != std::string::npos);
  CHECK(text.find("Meta\t90.00 ± 0.00\t*\t-\t\n") != std::string::npos);
}
