#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metatag/combine.hpp"
#include "metatag/crf.hpp"
#include "metatag/embed.hpp"
#include "metatag/graph.hpp"
#include "metatag/rng.hpp"

namespace metatag {

// One LSTM direction. Gate blocks are stacked in the order input, forget,
// cell, output inside wx (4h x in), wh (4h x h) and b (4h).
struct LstmDirection {
  Parameter wx;
  Parameter wh;
  Parameter b;
};

struct LstmParams {
  LstmDirection forward;
  LstmDirection backward;
  std::size_t hidden = 0;
};

struct ModelConfig {
  CombinerKind combiner = CombinerKind::kAttention;
  std::size_t lstm_hidden = 256;
  std::size_t attention_hidden = 0;  // 0: same as the projected width E
  std::uint64_t seed = 1;
};

struct EncodeOptions {
  double dropout = 0.0;
  Rng* rng = nullptr;                                     // required when dropout > 0
  std::vector<std::vector<double>>* attention = nullptr;  // per-token weights out
};

// BiLSTM-CRF tagger over n combined embedding sources.
class TaggerModel {
 public:
  TaggerModel() = default;
  TaggerModel(EmbeddingSet sources, std::vector<std::string> tags, const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t num_tags() const { return tags_.size(); }
  // Maps tag strings to indices; unknown tags are a ConfigError.
  std::vector<std::size_t> tag_indices(std::span<const std::string> tags) const;

  EmbeddingSet& sources() { return sources_; }
  const EmbeddingSet& sources() const { return sources_; }
  Combiner& combiner() { return combiner_; }
  const Combiner& combiner() const { return combiner_; }
  LstmParams& lstm() { return lstm_; }
  Parameter& emission_weight() { return emission_w_; }
  Parameter& emission_bias() { return emission_b_; }
  CrfParams& crf() { return crf_; }
  const CrfParams& crf() const { return crf_; }

  // Everything SGD updates; frozen embedding tables are left out.
  std::vector<Parameter*> trainable_parameters();
  // Every stored tensor, in checkpoint order.
  std::vector<Parameter*> all_parameters();

  // Emission scores (T x K) for one sentence.
  Var encode(Graph& g, std::span<const std::string> tokens, const EncodeOptions& options = {});
  Tensor emissions(std::span<const std::string> tokens);
  std::vector<std::string> predict(std::span<const std::string> tokens);

 private:
  ModelConfig config_;
  EmbeddingSet sources_;
  std::vector<std::string> tags_;
  Combiner combiner_;
  LstmParams lstm_;
  Parameter emission_w_;
  Parameter emission_b_;
  CrfParams crf_;
};

// Per-token attention weights, one row per token in source order.
std::vector<std::vector<double>> attention_trace(TaggerModel& model,
                                                 std::span<const std::string> tokens);
// "token<TAB>lang=0.1234<TAB>..." per token.
std::string format_attention_trace(const TaggerModel& model, std::span<const std::string> tokens,
                                   const std::vector<std::vector<double>>& weights);

}  // namespace metatag
