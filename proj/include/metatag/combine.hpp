#pragma once

#include <span>
#include <string>
#include <vector>

#include "metatag/graph.hpp"
#include "metatag/rng.hpp"

namespace metatag {

enum class CombinerKind { kConcat, kAttention };

std::string to_string(CombinerKind kind);
CombinerKind parse_combiner(const std::string& name);

// Per-source nonlinear maps x_i = tanh(Q_i e_i + b_i) into a shared width E.
struct ProjectionParams {
  std::vector<Parameter> q;  // E x d_i
  std::vector<Parameter> b;  // E
  std::size_t width = 0;
};

// Scores s_i = V tanh(W x_i) shared by all sources.
struct AttentionParams {
  Parameter w;  // H x E
  Parameter v;  // 1 x H
  std::size_t hidden = 0;
};

// Turns the n per-source vectors of one token into a single vector, either by
// stacking them or by an attention-weighted sum of their projections.
class Combiner {
 public:
  Combiner() = default;
  // `attention_hidden` of 0 means H = E. Initialization draws from `rng`
  // only for the attention combiner.
  Combiner(CombinerKind kind, std::vector<std::size_t> source_dims, std::size_t attention_hidden,
           Rng& rng);

  CombinerKind kind() const { return kind_; }
  std::size_t sources() const { return dims_.size(); }
  const std::vector<std::size_t>& source_dims() const { return dims_; }
  std::size_t output_width() const;

  ProjectionParams& projections() { return projections_; }
  const ProjectionParams& projections() const { return projections_; }
  AttentionParams& attention() { return attention_; }
  const AttentionParams& attention() const { return attention_; }
  std::vector<Parameter*> parameters();

  // `weights`, when given, receives the attention weights (attention only).
  Var forward(Graph& g, std::span<const Var> inputs, std::vector<double>* weights = nullptr);

 private:
  CombinerKind kind_ = CombinerKind::kConcat;
  std::vector<std::size_t> dims_;
  ProjectionParams projections_;
  AttentionParams attention_;
};

// Value-level forms of the combiner operations.
std::vector<double> combine_concat(std::span<const std::vector<double>> vectors);
std::vector<double> project(std::span<const double> e, std::size_t source,
                            const ProjectionParams& p);
std::vector<double> attention_weights(std::span<const std::vector<double>> projected,
                                      const AttentionParams& a);
std::vector<double> combine_attention(std::span<const std::vector<double>> vectors,
                                      const ProjectionParams& p, const AttentionParams& a);

// Graph forms, shared by the Combiner and the value-level wrappers.
Var project(Graph& g, Var e, Var q, Var b);
// Returns the weight vector (n) and writes the weighted sum to `combined`.
Var attend(Graph& g, std::span<const Var> projected, Var w, Var v, Var* combined);

}  // namespace metatag
