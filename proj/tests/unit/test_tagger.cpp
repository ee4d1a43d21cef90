#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "metatag/crf.hpp"
#include "metatag/error.hpp"
#include "metatag/eval.hpp"
#include "metatag/gradcheck.hpp"
#include "metatag/synthetic.hpp"
#include "metatag/tagger.hpp"
#include "metatag/trainer.hpp"

using namespace metatag;

namespace {

ModelConfig small_config(std::size_t hidden = 4, std::uint64_t seed = 1) {
  ModelConfig c;
  c.lstm_hidden = hidden;
  c.seed = seed;
  return c;
}

EmbeddingTable tiny_table(const std::string& lang, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words{"a", "b", "c"};
  Tensor m({words.size() + 1, dim});
  for (auto& v : m.values()) v = rng.uniform(-1, 1);
  return EmbeddingTable(lang, words, m);
}

}  // namespace

TEST_CASE("single-token sentence gives one finite emission row") {
  auto c = make_synthetic();
  TaggerModel m({c.first, c.second}, c.train.tags(), small_config());
  std::vector<std::string> tok{c.train[0].tokens[0]};
  Tensor em = m.emissions(tok);
  CHECK(em.shape() == Shape{1, 5});
  CHECK(em.all_finite());
}

TEST_CASE("zero LSTM and emission weights give zero emissions") {
  auto c = make_synthetic();
  TaggerModel m({c.first, c.second}, c.train.tags(), small_config());
  for (auto* p : {&m.lstm().forward.wx, &m.lstm().forward.wh, &m.lstm().forward.b,
                  &m.lstm().backward.wx, &m.lstm().backward.wh, &m.lstm().backward.b,
                  &m.emission_weight(), &m.emission_bias()}) {
    p->value().fill(0.0);
  }
  Tensor em = m.emissions(c.train[0].tokens);
  for (double v : em.values()) CHECK(v == 0.0);
}

TEST_CASE("emissions are deterministic for a seed") {
  auto c = make_synthetic();
  TaggerModel a({c.first, c.second}, c.train.tags(), small_config(6, 9));
  TaggerModel b({c.first, c.second}, c.train.tags(), small_config(6, 9));
  CHECK(a.emissions(c.dev[3].tokens) == b.emissions(c.dev[3].tokens));
  TaggerModel other({c.first, c.second}, c.train.tags(), small_config(6, 10));
  CHECK_FALSE(a.emissions(c.dev[3].tokens) == other.emissions(c.dev[3].tokens));
}

TEST_CASE("parameter naming and inventory checks") {
  auto c = make_synthetic();
  TaggerModel m({c.first, c.second}, c.train.tags(), small_config());
  CHECK(m.sources()[0].matrix().name() == "embed.0.sa");
  CHECK(m.sources()[1].language() == "sb");
  CHECK(m.trainable_parameters().size() == 6 + 6 + 2 + 3);
  CHECK(m.all_parameters().size() == 2 + 17);
  std::vector<std::string> bad{"NOUN", "ADJ"};
  CHECK_THROWS_AS(m.tag_indices(bad), ConfigError);
  CHECK_THROWS_AS(TaggerModel({}, c.train.tags(), small_config()), ConfigError);
}

TEST_CASE("full model gradient check") {
  for (CombinerKind kind : {CombinerKind::kAttention, CombinerKind::kConcat}) {
    auto a = tiny_table("xa", 3, 1);
    auto b = tiny_table("xb", 2, 2);
    a.set_trainable(true);
    ModelConfig cfg = small_config(3, 4);
    cfg.combiner = kind;
    TaggerModel m({a, b}, {"P", "Q", "R"}, cfg);
    // random nonzero CRF parameters so the check exercises every term
    Rng rng(3);
    for (auto* p : m.crf().parameters()) {
      for (auto& v : p->value().values()) v = rng.uniform(-0.5, 0.5);
    }
    std::vector<std::string> tokens{"a", "cb", "zz", "b"};
    std::vector<std::size_t> gold{0, 2, 1, 1};
    auto params = m.trainable_parameters();
    auto report = grad_check([&](Graph& g) { return crf_nll(g, m.encode(g, tokens), gold, m.crf()); },
                             params);
    for (const auto& e : report.per_parameter) {
      INFO(e.parameter);
      CHECK(e.max_error <= 1e-4);
    }
  }
}

TEST_CASE("duplicated trainable sources are independent parameter groups") {
  auto t = tiny_table("mono", 3, 5);
  t.set_trainable(true);
  TaggerModel m({t, t}, {"P", "Q"}, small_config(3, 2));
  auto& first = m.sources()[0].matrix();
  auto& second = m.sources()[1].matrix();
  CHECK(&first != &second);
  CHECK(first.value() == second.value());
  for (auto* p : m.trainable_parameters()) p->zero_grad();
  std::vector<std::string> tokens{"a", "b", "c"};
  std::vector<std::size_t> gold{0, 1, 0};
  Graph g;
  g.backward(crf_nll(g, m.encode(g, tokens), gold, m.crf()));
  CHECK_FALSE(first.grad() == second.grad());
}

TEST_CASE("dropout needs an rng and changes training-mode output") {
  auto c = make_synthetic();
  TaggerModel m({c.first}, c.train.tags(), small_config());
  EncodeOptions opts;
  opts.dropout = 0.5;
  Graph g;
  CHECK_THROWS_AS(m.encode(g, c.train[0].tokens, opts), ArgumentError);
  Rng rng(1);
  opts.rng = &rng;
  Graph h;
  Var dropped = m.encode(h, c.train[0].tokens, opts);
  CHECK_FALSE(h.value(dropped) == m.emissions(c.train[0].tokens));
}

TEST_CASE("plateau schedule halves after patience flat epochs") {
  PlateauSchedule s(0.1, 3, 0.5);
  CHECK(s.observe(0.5));
  CHECK_FALSE(s.observe(0.5));
  CHECK_FALSE(s.observe(0.5));
  CHECK(s.learning_rate() == 0.1);
  CHECK_FALSE(s.observe(0.5));
  CHECK(s.learning_rate() == 0.05);
  CHECK(s.observe(0.6));
  CHECK(s.learning_rate() == 0.05);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(validate(c));
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = TrainConfig{};
  c.patience = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = TrainConfig{};
  c.dropout = 1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("training is deterministic for a seed") {
  SyntheticOptions so;
  so.train_sentences = 12;
  so.dev_sentences = 6;
  auto c = make_synthetic(so);
  TrainConfig tc;
  tc.max_epochs = 4;
  tc.batch_size = 4;
  for (double dropout : {0.0, 0.1}) {
    tc.dropout = dropout;
    TaggerModel a({c.first, c.second}, c.train.tags(), small_config(5));
    TaggerModel b({c.first, c.second}, c.train.tags(), small_config(5));
    auto ra = train(c.train, c.dev, a, tc);
    auto rb = train(c.train, c.dev, b, tc);
    REQUIRE(ra.epochs.size() == rb.epochs.size());
    for (std::size_t i = 0; i < ra.epochs.size(); ++i) CHECK(ra.epochs[i].loss == rb.epochs[i].loss);
    CHECK(format_epoch_log(ra) == format_epoch_log(rb));
  }
}

TEST_CASE("training keeps the best dev epoch") {
  SyntheticOptions so;
  so.train_sentences = 20;
  so.dev_sentences = 10;
  auto c = make_synthetic(so);
  TaggerModel m({c.first, c.second}, c.train.tags(), small_config(8));
  TrainConfig tc;
  tc.max_epochs = 6;
  tc.batch_size = 1;
  tc.learning_rate = 0.05;
  auto r = train(c.train, c.dev, m, tc);
  REQUIRE(r.best_epoch >= 1);
  const double dev = task_metric(Task::kPos, c.dev, predict_all(m, c.dev));
  CHECK(dev == r.best_dev);
  CHECK(r.epochs[r.best_epoch - 1].improved);
}

TEST_CASE("training rejects mismatched tags and reports non-finite loss") {
  auto c = make_synthetic();
  TaggerModel m({c.first}, {"DET", "NOUN"}, small_config());
  CHECK_THROWS_AS(train(c.train, c.dev, m, TrainConfig{}), ConfigError);

  TaggerModel bad({c.first}, c.train.tags(), small_config());
  bad.crf().start.value()[0] = std::numeric_limits<double>::infinity();
  bad.crf().start.value()[1] = -std::numeric_limits<double>::infinity();
  TrainConfig tc;
  tc.batch_size = 10;
  try {
    (void)train(c.train, c.dev, bad, tc);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("batch 1") != std::string::npos);
  }
}

TEST_CASE("attention trace rows sum to one and format with four decimals") {
  auto c = make_synthetic();
  TaggerModel m({c.first, c.second}, c.train.tags(), small_config());
  auto w = attention_trace(m, c.test[0].tokens);
  REQUIRE(w.size() == c.test[0].tokens.size());
  for (const auto& row : w) {
    REQUIRE(row.size() == 2);
    CHECK(std::abs(row[0] + row[1] - 1.0) <= 1e-9);
  }
  std::vector<std::string> toks{"x"};
  std::vector<std::vector<double>> weights{{0.25, 0.75}};
  CHECK(format_attention_trace(m, toks, weights) == "x\tsa=0.2500\tsb=0.7500\n");

  TaggerModel single({c.first}, c.train.tags(), small_config());
  for (const auto& row : attention_trace(single, c.test[1].tokens)) CHECK(row[0] == 1.0);

  ModelConfig concat = small_config();
  concat.combiner = CombinerKind::kConcat;
  TaggerModel k({c.first, c.second}, c.train.tags(), concat);
  CHECK_THROWS_AS(attention_trace(k, c.test[0].tokens), UnsupportedError);
}

TEST_CASE("attention favours the informative source") {
  SyntheticOptions so;
  so.conflate_first = false;
  so.uninformative_second = true;
  auto c = make_synthetic(so);
  TrainConfig tc;
  tc.batch_size = 1;
  tc.dropout = 0.0;
  std::size_t tokens = 0, first_wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TaggerModel m({c.first, c.second}, c.train.tags(), small_config(16, seed));
    tc.seed = seed;
    (void)train(c.train, c.dev, m, tc);
    for (const auto& s : c.test.sentences()) {
      for (const auto& row : attention_trace(m, s.tokens)) {
        ++tokens;
        if (row[0] > row[1]) ++first_wins;
      }
    }
  }
  CHECK(static_cast<double>(first_wins) / static_cast<double>(tokens) >= 0.9);
}
