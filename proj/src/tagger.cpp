#include "metatag/tagger.hpp"

#include <cstdio>
#include <unordered_map>

#include "metatag/error.hpp"
#include "metatag/init.hpp"

namespace metatag {

namespace {

LstmDirection make_direction(const std::string& prefix, std::size_t input, std::size_t hidden,
                             Rng& rng) {
  LstmDirection d;
  d.wx = Parameter(prefix + ".wx", scaled_uniform(4 * hidden, input, rng));
  d.wh = Parameter(prefix + ".wh", scaled_uniform(4 * hidden, hidden, rng));
  Tensor bias({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias[i] = 1.0;  // forget gate
  d.b = Parameter(prefix + ".b", std::move(bias));
  return d;
}

std::vector<Var> run_direction(Graph& g, LstmDirection& p, std::size_t hidden,
                               const std::vector<Var>& inputs, bool reverse) {
  const std::size_t T = inputs.size();
  std::vector<Var> states(T);
  Var wx = g.param(p.wx), wh = g.param(p.wh), b = g.param(p.b);
  Var h{}, c{};
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = reverse ? T - 1 - step : step;
    Var z = g.add(g.matmul(wx, inputs[t]), b);
    if (step > 0) z = g.add(z, g.matmul(wh, h));
    Var in_gate = g.sigmoid(g.slice(z, 0, hidden));
    Var forget = g.sigmoid(g.slice(z, hidden, hidden));
    Var cell = g.tanh(g.slice(z, 2 * hidden, hidden));
    Var out_gate = g.sigmoid(g.slice(z, 3 * hidden, hidden));
    Var fresh = g.mul(in_gate, cell);
    c = step > 0 ? g.add(g.mul(forget, c), fresh) : fresh;
    h = g.mul(out_gate, g.tanh(c));
    states[t] = h;
  }
  return states;
}

}  // namespace

TaggerModel::TaggerModel(EmbeddingSet sources, std::vector<std::string> tags,
                         const ModelConfig& config)
    : config_(config), sources_(std::move(sources)), tags_(std::move(tags)) {
  if (sources_.empty()) throw ConfigError("model needs at least one embedding source");
  if (tags_.empty()) throw ConfigError("model needs a non-empty tag inventory");
  if (config_.lstm_hidden == 0) throw ConfigError("LSTM hidden size must be at least 1");
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    sources_[i].rename("embed." + std::to_string(i) + "." + sources_[i].language());
    dims.push_back(sources_[i].dim());
  }
  Rng rng(config_.seed);
  combiner_ = Combiner(config_.combiner, dims, config_.attention_hidden, rng);
  const std::size_t h = config_.lstm_hidden;
  lstm_.hidden = h;
  lstm_.forward = make_direction("lstm.forward", combiner_.output_width(), h, rng);
  lstm_.backward = make_direction("lstm.backward", combiner_.output_width(), h, rng);
  const std::size_t k = tags_.size();
  emission_w_ = Parameter("emission.w", scaled_uniform(k, 2 * h, rng));
  emission_b_ = Parameter("emission.b", Tensor({k}));
  crf_ = CrfParams(k);
}

std::vector<std::size_t> TaggerModel::tag_indices(std::span<const std::string> tags) const {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    std::size_t i = 0;
    while (i < tags_.size() && tags_[i] != t) ++i;
    if (i == tags_.size()) throw ConfigError("tag '" + t + "' is not in the model's tag inventory");
    out.push_back(i);
  }
  return out;
}

std::vector<Parameter*> TaggerModel::trainable_parameters() {
  std::vector<Parameter*> out;
  for (auto& s : sources_) {
    if (s.trainable()) out.push_back(&s.matrix());
  }
  for (auto* p : combiner_.parameters()) out.push_back(p);
  for (auto* d : {&lstm_.forward, &lstm_.backward}) {
    out.push_back(&d->wx);
    out.push_back(&d->wh);
    out.push_back(&d->b);
  }
  out.push_back(&emission_w_);
  out.push_back(&emission_b_);
  for (auto* p : crf_.parameters()) out.push_back(p);
  return out;
}

std::vector<Parameter*> TaggerModel::all_parameters() {
  std::vector<Parameter*> out;
  for (auto& s : sources_) {
    if (!s.trainable()) out.push_back(&s.matrix());
  }
  for (auto* p : trainable_parameters()) out.push_back(p);
  return out;
}

Var TaggerModel::encode(Graph& g, std::span<const std::string> tokens,
                        const EncodeOptions& options) {
  if (tokens.empty()) throw ArgumentError("cannot encode an empty sentence");
  if (options.dropout > 0.0 && !options.rng) throw ArgumentError("dropout needs a random stream");
  if (options.attention) options.attention->clear();
  std::vector<Var> combined;
  combined.reserve(tokens.size());
  std::vector<Var> per_source(sources_.size());
  std::vector<double> weights;
  for (const auto& token : tokens) {
    for (std::size_t i = 0; i < sources_.size(); ++i) per_source[i] = lookup(g, token, sources_[i]);
    Var e = combiner_.forward(g, per_source, options.attention ? &weights : nullptr);
    if (options.attention) options.attention->push_back(weights);
    if (options.dropout > 0.0) {
      Tensor mask(g.value(e).shape());
      const double keep = 1.0 - options.dropout;
      for (auto& m : mask.values()) m = options.rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      e = g.mask_mul(e, std::move(mask));
    }
    combined.push_back(e);
  }
  const auto fwd = run_direction(g, lstm_.forward, lstm_.hidden, combined, false);
  const auto bwd = run_direction(g, lstm_.backward, lstm_.hidden, combined, true);
  Var w = g.param(emission_w_), b = g.param(emission_b_);
  std::vector<Var> rows;
  rows.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Var both[] = {fwd[t], bwd[t]};
    rows.push_back(g.add(g.matmul(w, g.concat(both)), b));
  }
  return g.stack(rows);
}

Tensor TaggerModel::emissions(std::span<const std::string> tokens) {
  Graph g;
  return g.value(encode(g, tokens));
}

std::vector<std::string> TaggerModel::predict(std::span<const std::string> tokens) {
  const auto best = viterbi(emissions(tokens), crf_);
  std::vector<std::string> out;
  out.reserve(best.path.size());
  for (auto y : best.path) out.push_back(tags_[y]);
  return out;
}

std::vector<std::vector<double>> attention_trace(TaggerModel& model,
                                                 std::span<const std::string> tokens) {
  if (model.combiner().kind() != CombinerKind::kAttention) {
    throw UnsupportedError("attention trace needs a model with the attention combiner");
  }
  std::vector<std::vector<double>> weights;
  Graph g;
  EncodeOptions options;
  options.attention = &weights;
  model.encode(g, tokens, options);
  return weights;
}

std::string format_attention_trace(const TaggerModel& model, std::span<const std::string> tokens,
                                   const std::vector<std::vector<double>>& weights) {
  std::string out;
  char buf[32];
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    out += tokens[t];
    for (std::size_t i = 0; i < model.sources().size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.4f", weights.at(t).at(i));
      out += '\t';
      out += model.sources()[i].language();
      out += '=';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace metatag
