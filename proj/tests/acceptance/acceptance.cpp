// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "crf_oracle.hpp"
#include "test_support.hpp"
#include "metatag/combine.hpp"
#include "metatag/corpus.hpp"
#include "metatag/crf.hpp"
#include "metatag/embed.hpp"
#include "metatag/eval.hpp"
#include "metatag/gradcheck.hpp"
#include "metatag/langdist.hpp"
#include "metatag/rng.hpp"
#include "metatag/tagger.hpp"
#include "metatag/trainer.hpp"

using namespace metatag;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& line) {
  std::printf("      %s\n", line.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::string kData = METATAG_DATA_DIR;

void crf_oracle() {
  const auto t0 = Clock::now();
  Rng rng(11);
  double worst_z = 0.0, worst_v = 0.0;
  std::size_t mismatched = 0, compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t T = 1 + rng.below(5), K = 2 + rng.below(3);
    CrfParams crf = testing::random_crf(K, rng);
    Tensor em = testing::random_emissions(T, K, rng);
    auto all = testing::enumerate_paths(em, crf);
    worst_z = std::max(worst_z, std::abs(crf_log_partition(em, crf) - testing::brute_log_partition(all)));

    std::size_t best = 0;
    double second = -INFINITY;
    for (std::size_t p = 1; p < all.scores.size(); ++p) {
      if (all.scores[p] > all.scores[best]) {
        second = all.scores[best];
        best = p;
      } else {
        second = std::max(second, all.scores[p]);
      }
    }
    auto vit = viterbi(em, crf);
    worst_v = std::max(worst_v, std::abs(vit.score - all.scores[best]));
    if (all.scores[best] - second > 1e-9) {
      ++compared;
      if (vit.path != all.paths[best]) ++mismatched;
    }
  }
  const double secs = seconds_since(t0);
  report(1, "CRF oracle equivalence",
         worst_z <= 1e-8 && worst_v <= 1e-9 && mismatched == 0 && secs < 10.0,
         "max |logZ err| " + fmt("%.2e", worst_z) + ", max Viterbi score err " + fmt("%.2e", worst_v) +
             ", path mismatches " + std::to_string(mismatched) + "/" + std::to_string(compared) +
             ", " + fmt("%.2f s", secs));
}

void gradient_check() {
  Rng rng(21);
  auto table = [&](const std::string& lang, std::size_t dim) {
    std::vector<std::string> words{"haus", "baum", "see"};
    Tensor m({words.size() + 1, dim});
    for (auto& v : m.values()) v = rng.uniform(-1, 1);
    EmbeddingTable t(lang, words, m);
    t.set_trainable(true);
    return t;
  };
  ModelConfig cfg;
  cfg.combiner = CombinerKind::kAttention;
  cfg.lstm_hidden = 3;
  cfg.seed = 5;
  TaggerModel model({table("de", 4), table("nl", 3)}, {"A", "B", "C"}, cfg);
  for (auto* p : model.crf().parameters()) {
    for (auto& v : p->value().values()) v = rng.uniform(-0.5, 0.5);
  }
  std::vector<std::string> tokens{"haus", "see", "zug", "baum"};
  std::vector<std::size_t> gold{2, 0, 1, 1};
  auto params = model.trainable_parameters();
  auto r = grad_check([&](Graph& g) { return crf_nll(g, model.encode(g, tokens), gold, model.crf()); },
                      params);
  std::string worst_name;
  double worst = 0.0;
  for (const auto& e : r.per_parameter) {
    if (e.max_error >= worst) {
      worst = e.max_error;
      worst_name = e.parameter;
    }
  }
  report(2, "gradient check, attention BiLSTM-CRF (T=4, K=3, n=2)", worst <= 1e-4,
         std::to_string(r.per_parameter.size()) + " parameter groups, max rel err " + fmt("%.2e", worst) +
             " (" + worst_name + ")");
}

void attention_normalization() {
  Rng rng(31);
  double worst_sum = 0.0, min_alpha = 1.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 2 + rng.below(4), E = 2 + rng.below(6), H = 1 + rng.below(6);
    AttentionParams a;
    a.w = Parameter("w", testing::random_tensor({H, E}, rng, 2.0));
    a.v = Parameter("v", testing::random_tensor({1, H}, rng, 2.0));
    a.hidden = H;
    std::vector<std::vector<double>> x(n, std::vector<double>(E));
    for (auto& row : x) {
      for (auto& v : row) v = rng.uniform(-1, 1);
    }
    double sum = 0.0;
    for (double w : attention_weights(x, a)) {
      sum += w;
      min_alpha = std::min(min_alpha, w);
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }

  AttentionParams a;
  a.w = Parameter("w", testing::random_tensor({4, 5}, rng));
  a.v = Parameter("v", testing::random_tensor({1, 4}, rng));
  a.hidden = 4;
  std::vector<std::vector<double>> one{{0.3, -0.2, 0.9, 0.1, -0.7}};
  const bool single_exact = attention_weights(one, a) == std::vector<double>{1.0};

  a.v.value().fill(0.0);
  std::vector<std::vector<double>> three{{1, 2, 3, 4, 5}, {-1, 0, 1, 0, -1}, {0.5, 0.5, 0.5, 0.5, 0.5}};
  double uniform_err = 0.0;
  for (double w : attention_weights(three, a)) uniform_err = std::max(uniform_err, std::abs(w - 1.0 / 3.0));

  report(3, "attention normalization",
         worst_sum <= 1e-9 && min_alpha >= 0.0 && single_exact && uniform_err <= 1e-12,
         "max |sum-1| " + fmt("%.2e", worst_sum) + ", min alpha " + fmt("%.3e", min_alpha) +
             ", n=1 exact " + (single_exact ? "yes" : "no") + ", V=0 max dev " + fmt("%.1e", uniform_err));
}

void voting_reproduction() {
  const auto t0 = Clock::now();
  std::map<std::string, std::vector<Ranking>> inputs;
  for (auto& row : parse_rankings(read_text_file(kData + "/fixtures/measure_rankings.tsv"))) {
    inputs[row.ranking.target].push_back(row.ranking);
  }
  const auto expected = parse_rankings(read_text_file(kData + "/fixtures/voted_rankings.tsv"));
  std::size_t matched = 0;
  std::string bad;
  for (const auto& row : expected) {
    const Ranking got = vote(inputs.at(row.ranking.target));
    if (got == row.ranking) {
      ++matched;
    } else {
      bad += " " + row.ranking.target;
    }
  }
  const double secs = seconds_since(t0);
  report(4, "voting reproduces the language ranking table",
         matched == expected.size() && expected.size() == 5 && secs < 1.0,
         std::to_string(matched) + "/" + std::to_string(expected.size()) + " columns exact" +
             (bad.empty() ? "" : ", mismatched:" + bad) + ", " + fmt("%.3f s", secs));
}

void distance_spot_checks() {
  auto uniform = [](const std::string&) { return 1.0 / 4.0; };
  std::vector<std::string> text{"a", "b", "c", "d", "b"};
  const double pp_uniform = perplexity(uniform, text);
  std::vector<std::string> train{"a", "a", "b"}, test{"a", "b"};
  const double pp_six = perplexity(train_unigram(train), test);
  const double dv = vocab_overlap(2, 3, 4, 5);
  auto flat = [](std::vector<std::string> order) {
    Ranking r;
    r.target = "t";
    for (auto& l : order) r.groups.push_back({l});
    return r;
  };
  const double s_same = spearman(flat({"a", "b", "c", "d"}), flat({"a", "b", "c", "d"}));
  const double s_rev = spearman(flat({"a", "b", "c", "d"}), flat({"d", "c", "b", "a"}));
  const double s_08 = spearman(flat({"a", "b", "c", "d"}), flat({"b", "a", "c", "d"}));
  const bool ok = pp_uniform == 4.0 && std::abs(pp_six - std::sqrt(6.0)) <= 1e-9 && dv == 0.625 &&
                  std::abs(s_same - 1) <= 1e-12 && std::abs(s_rev + 1) <= 1e-12 && std::abs(s_08 - 0.8) <= 1e-12;
  report(5, "distance formula spot checks", ok,
         "uniform PP " + fmt("%.17g", pp_uniform) + ", add-one PP " + fmt("%.12f", pp_six) + ", d_V " +
             fmt("%.17g", dv) + ", spearman " + fmt("%.3f", s_same) + "/" + fmt("%.3f", s_rev) + "/" +
             fmt("%.3f", s_08));
}

void significance_protocol() {
  std::vector<double> same{0.5, 0.7, 0.2, 0.9, 0.4};
  const double p_same = paired_permutation_test(same, same).p_value;

  std::vector<double> a(20), b(20, 0.0);
  for (int i = 0; i < 20; ++i) a[static_cast<std::size_t>(i)] = 0.01 * (i + 1);
  const auto exact20 = paired_permutation_test(a, b);
  const bool exact_ok = exact20.exact && exact20.p_value == std::ldexp(1.0, -20);

  Rng rng(61);
  const std::uint64_t B = std::uint64_t{1} << 20;
  double worst_sigma = 0.0;
  std::string cases;
  for (int c = 0; c < 5; ++c) {
    std::vector<double> x(15), y(15);
    const double shift = 0.1 * c;
    for (std::size_t i = 0; i < 15; ++i) {
      y[i] = rng.uniform(0, 1);
      x[i] = y[i] + rng.uniform(-1, 1) + shift;
    }
    const auto e = paired_permutation_test(x, y, B, 1, PermutationMode::kExact);
    const auto s = paired_permutation_test(x, y, B, 1000 + static_cast<std::uint64_t>(c), PermutationMode::kSampled);
    const double sd = std::sqrt(e.p_value * (1 - e.p_value) / static_cast<double>(B));
    const double z = sd > 0 ? std::abs(s.p_value - e.p_value) / sd : (s.p_value == e.p_value ? 0.0 : INFINITY);
    worst_sigma = std::max(worst_sigma, z);
    cases += fmt(" %.4f", e.p_value) + fmt("/%.4f", s.p_value);
  }
  report(6, "significance protocol", p_same == 1.0 && exact_ok && worst_sigma <= 3.0,
         "identical p " + fmt("%.3g", p_same) + ", 20 positive diffs p " + fmt("%.6e", exact20.p_value) +
             (exact20.exact ? " (exact)" : " (sampled)") + ", n=15 exact/sampled" + cases +
             ", worst " + fmt("%.2f sd", worst_sigma));
}

struct Synthetic {
  Dataset train, dev, test;
  EmbeddingTable sa, sb;
};

Synthetic load_synthetic() {
  const std::string dir = kData + "/synthetic/";
  return {parse_conll(read_text_file(dir + "train.conll")), parse_conll(read_text_file(dir + "dev.conll")),
          parse_conll(read_text_file(dir + "test.conll")), load_table_file(dir + "sa.vec", "sa"),
          load_table_file(dir + "sb.vec", "sb")};
}

void overfit(const Synthetic& s) {
  // Selection on the training split, so the kept epoch is the best training accuracy reached.
  auto run = [&](TrainResult& result) {
    ModelConfig mc;
    TaggerModel model({s.sa, s.sb}, s.train.tags(), mc);
    TrainConfig tc;
    tc.max_epochs = 200;
    tc.task = Task::kPos;
    const auto t0 = Clock::now();
    result = train(s.train, s.train, model, tc);
    const double secs = seconds_since(t0);
    return std::make_pair(token_accuracy(s.train, predict_all(model, s.train)).accuracy, secs);
  };
  TrainResult first, second;
  const auto [acc, secs] = run(first);
  const auto [acc2, secs2] = run(second);
  bool identical = first.epochs.size() == second.epochs.size();
  for (std::size_t i = 0; identical && i < first.epochs.size(); ++i) {
    identical = first.epochs[i].loss == second.epochs[i].loss;
  }
  std::string trace = "loss trace:";
  for (std::size_t i = 0; i < first.epochs.size() && i < 8; ++i) trace += fmt(" %.4g", first.epochs[i].loss);
  info(trace + (first.epochs.size() > 8 ? " ..." : ""));
  info("epochs run " + std::to_string(first.epochs.size()) + ", best epoch " + std::to_string(first.best_epoch) +
       ", final lr " + fmt("%.3g", first.epochs.back().learning_rate));
  report(7, "end-to-end overfit at reference defaults", acc >= 0.99 && identical && secs < 120.0 && secs2 < 120.0,
         "train accuracy " + fmt("%.4f", acc) + " (target 0.99), trace " +
             (identical ? "bit-identical" : "differs") + ", " + fmt("%.1f s", secs) + fmt(" / %.1f s per run", secs2) +
             (acc2 == acc ? "" : ", second-run accuracy differs"));
}

void seeded_comparisons(const Synthetic& s) {
  struct Scores {
    std::vector<double> dev, test;
  };
  auto run = [&](std::vector<EmbeddingTable> sources, std::uint64_t seed, Scores& out) {
    ModelConfig mc;
    mc.seed = seed;
    TaggerModel model(EmbeddingSet(std::move(sources)), s.train.tags(), mc);
    TrainConfig tc;
    tc.seed = seed;
    tc.task = Task::kPos;
    train(s.train, s.dev, model, tc);
    out.dev.push_back(token_accuracy(s.dev, predict_all(model, s.dev)).accuracy);
    out.test.push_back(token_accuracy(s.test, predict_all(model, s.test)).accuracy);
  };
  const auto t0 = Clock::now();
  Scores mono, monomono, meta;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    run({s.sa}, seed, mono);
    run({s.sa, s.sa}, seed, monomono);
    run({s.sa, s.sb}, seed, meta);
    info("seed " + std::to_string(seed) + fmt(": dev mono %.4f", mono.dev.back()) +
         fmt(" mono+mono %.4f", monomono.dev.back()) + fmt(" meta %.4f", meta.dev.back()) +
         fmt(" | test mono %.4f", mono.test.back()) + fmt(" meta %.4f", meta.test.back()));
  }
  auto mean = [](const std::vector<double>& v) {
    double t = 0;
    for (double x : v) t += x;
    return t / static_cast<double>(v.size());
  };
  const double gap = 100.0 * (mean(monomono.dev) - mean(mono.dev));
  report(8, "Mono+Mono within 2 points of Mono", std::abs(gap) <= 2.0,
         fmt("mean dev accuracy mono %.2f", 100 * mean(mono.dev)) + fmt(", mono+mono %.2f", 100 * mean(monomono.dev)) +
             fmt(", gap %+.2f points", gap));
  const double gain = 100.0 * (mean(meta.test) - mean(mono.test));
  report(9, "complementary second source helps (synthetic stand-in)", gain > 0.0,
         fmt("mean test accuracy mono %.2f", 100 * mean(mono.test)) + fmt(", attention %.2f", 100 * mean(meta.test)) +
             fmt(", improvement %+.2f points", gain) + fmt(", %.0f s", seconds_since(t0)));
  info("real-data scores need pretrained BPEmb/FLAIR embeddings and licensed corpora; not attempted");
}

}  // namespace

int main() {
  crf_oracle();
  gradient_check();
  attention_normalization();
  voting_reproduction();
  distance_spot_checks();
  significance_protocol();
  const Synthetic s = load_synthetic();
  overfit(s);
  seeded_comparisons(s);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
