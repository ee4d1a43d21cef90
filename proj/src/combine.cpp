#include "metatag/combine.hpp"

#include <algorithm>

#include "metatag/error.hpp"
#include "metatag/init.hpp"

namespace metatag {

std::string to_string(CombinerKind kind) {
  return kind == CombinerKind::kConcat ? "concat" : "attention";
}

CombinerKind parse_combiner(const std::string& name) {
  if (name == "concat") return CombinerKind::kConcat;
  if (name == "attention") return CombinerKind::kAttention;
  throw ConfigError("unknown combiner '" + name + "' (expected concat or attention)");
}

Combiner::Combiner(CombinerKind kind, std::vector<std::size_t> source_dims,
                   std::size_t attention_hidden, Rng& rng)
    : kind_(kind), dims_(std::move(source_dims)) {
  if (dims_.empty()) throw ArgumentError("combiner needs at least one embedding source");
  if (kind_ != CombinerKind::kAttention) return;
  const std::size_t width = *std::max_element(dims_.begin(), dims_.end());
  const std::size_t hidden = attention_hidden ? attention_hidden : width;
  projections_.width = width;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    projections_.q.emplace_back("combine.q." + std::to_string(i), scaled_uniform(width, dims_[i], rng));
    projections_.b.emplace_back("combine.b." + std::to_string(i), Tensor({width}));
  }
  attention_.hidden = hidden;
  attention_.w = Parameter("combine.w", scaled_uniform(hidden, width, rng));
  attention_.v = Parameter("combine.v", scaled_uniform(1, hidden, rng));
}

std::size_t Combiner::output_width() const {
  if (kind_ == CombinerKind::kAttention) return projections_.width;
  std::size_t total = 0;
  for (auto d : dims_) total += d;
  return total;
}

std::vector<Parameter*> Combiner::parameters() {
  std::vector<Parameter*> out;
  if (kind_ != CombinerKind::kAttention) return out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    out.push_back(&projections_.q[i]);
    out.push_back(&projections_.b[i]);
  }
  out.push_back(&attention_.w);
  out.push_back(&attention_.v);
  return out;
}

Var project(Graph& g, Var e, Var q, Var b) {
  const Tensor& qv = g.value(q);
  const Tensor& ev = g.value(e);
  if (ev.rank() != 1 || qv.cols() != ev.size()) {
    throw DimensionError("project: input of width " + shape_string(ev.shape()) +
                         " does not match projection " + shape_string(qv.shape()));
  }
  return g.tanh(g.add(g.matmul(q, e), b));
}

Var attend(Graph& g, std::span<const Var> projected, Var w, Var v, Var* combined) {
  if (projected.empty()) throw ArgumentError("attention over zero sources");
  std::vector<Var> scores;
  scores.reserve(projected.size());
  for (Var x : projected) scores.push_back(g.matmul(v, g.tanh(g.matmul(w, x))));
  Var alpha = g.softmax(g.concat(scores));
  if (combined) *combined = g.matmul(alpha, g.stack(projected));
  return alpha;
}

Var Combiner::forward(Graph& g, std::span<const Var> inputs, std::vector<double>* weights) {
  if (inputs.size() != dims_.size()) {
    throw ArgumentError("combiner expects " + std::to_string(dims_.size()) + " sources, got " +
                        std::to_string(inputs.size()));
  }
  if (kind_ == CombinerKind::kConcat) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (g.value(inputs[i]).size() != dims_[i]) {
        throw DimensionError("source " + std::to_string(i) + " has width " +
                             std::to_string(g.value(inputs[i]).size()) + ", expected " +
                             std::to_string(dims_[i]));
      }
    }
    return inputs.size() == 1 ? inputs[0] : g.concat(inputs);
  }
  std::vector<Var> xs;
  xs.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    xs.push_back(project(g, inputs[i], g.param(projections_.q[i]), g.param(projections_.b[i])));
  }
  Var combined;
  Var alpha = attend(g, xs, g.param(attention_.w), g.param(attention_.v), &combined);
  if (weights) {
    const auto vals = g.value(alpha).values();
    weights->assign(vals.begin(), vals.end());
  }
  return combined;
}

std::vector<double> combine_concat(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) throw ArgumentError("concatenation of zero embeddings");
  std::vector<double> out;
  for (const auto& v : vectors) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<double> project(std::span<const double> e, std::size_t source,
                            const ProjectionParams& p) {
  if (source >= p.q.size()) throw ArgumentError("no projection for source " + std::to_string(source));
  Graph g;
  Var x = project(g, g.constant(Tensor::vector({e.begin(), e.end()})),
                  g.constant(p.q[source].value()), g.constant(p.b[source].value()));
  const auto vals = g.value(x).values();
  return {vals.begin(), vals.end()};
}

std::vector<double> attention_weights(std::span<const std::vector<double>> projected,
                                      const AttentionParams& a) {
  if (projected.empty()) throw ArgumentError("attention over zero sources");
  Graph g;
  std::vector<Var> xs;
  for (const auto& x : projected) xs.push_back(g.constant(Tensor::vector(x)));
  Var alpha = attend(g, xs, g.constant(a.w.value()), g.constant(a.v.value()), nullptr);
  const auto vals = g.value(alpha).values();
  return {vals.begin(), vals.end()};
}

std::vector<double> combine_attention(std::span<const std::vector<double>> vectors,
                                      const ProjectionParams& p, const AttentionParams& a) {
  if (vectors.empty()) throw ArgumentError("attention over zero sources");
  if (vectors.size() != p.q.size()) {
    throw ArgumentError("got " + std::to_string(vectors.size()) + " embeddings for " +
                        std::to_string(p.q.size()) + " projections");
  }
  Graph g;
  std::vector<Var> xs;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    xs.push_back(project(g, g.constant(Tensor::vector(vectors[i])), g.constant(p.q[i].value()),
                         g.constant(p.b[i].value())));
  }
  Var combined;
  attend(g, xs, g.constant(a.w.value()), g.constant(a.v.value()), &combined);
  const auto vals = g.value(combined).values();
  return {vals.begin(), vals.end()};
}

}  // namespace metatag
