#pragma once

#include <span>
#include <vector>

#include "metatag/graph.hpp"

namespace metatag {

// Linear-chain CRF over K tags. transitions(i, j) scores tag i followed by j.
struct CrfParams {
  CrfParams() = default;
  explicit CrfParams(std::size_t num_tags);

  std::size_t num_tags() const { return start.value().size(); }
  std::vector<Parameter*> parameters() { return {&transitions, &start, &stop}; }

  Parameter transitions;  // K x K
  Parameter start;        // K
  Parameter stop;         // K
};

using TagPath = std::vector<std::size_t>;

// start[y1] + sum_t emissions[t, y_t] + sum_t A[y_{t-1}, y_t] + stop[y_T]
double crf_score(const Tensor& emissions, std::span<const std::size_t> path, const CrfParams& crf);
// log of the sum over all K^T paths of exp(score), by the forward recursion.
double crf_log_partition(const Tensor& emissions, const CrfParams& crf);
double crf_nll(const Tensor& emissions, std::span<const std::size_t> gold, const CrfParams& crf);

struct ViterbiResult {
  TagPath path;
  double score = 0.0;
};
// Best path; ties resolve to the lower tag index.
ViterbiResult viterbi(const Tensor& emissions, const CrfParams& crf);

// Posterior tag marginals p(y_t = k | x), T x K.
Tensor crf_marginals(const Tensor& emissions, const CrfParams& crf);

// Differentiable forms. `emissions` is a T x K node.
Var crf_score(Graph& g, Var emissions, std::span<const std::size_t> path, CrfParams& crf);
Var crf_log_partition(Graph& g, Var emissions, CrfParams& crf);
Var crf_nll(Graph& g, Var emissions, std::span<const std::size_t> gold, CrfParams& crf);

}  // namespace metatag
