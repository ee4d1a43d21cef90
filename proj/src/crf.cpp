#include "metatag/crf.hpp"

#include <cmath>

#include "metatag/error.hpp"

namespace metatag {

CrfParams::CrfParams(std::size_t num_tags)
    : transitions("crf.transitions", Tensor({num_tags, num_tags})),
      start("crf.start", Tensor({num_tags})),
      stop("crf.stop", Tensor({num_tags})) {}

namespace {

void check_emissions(const Tensor& emissions, std::size_t k) {
  if (emissions.rank() != 2 || emissions.cols() != k) {
    throw DimensionError("emissions " + shape_string(emissions.shape()) + " do not have " +
                         std::to_string(k) + " tag columns");
  }
}

void check_path(const Tensor& emissions, std::span<const std::size_t> path, std::size_t k) {
  if (path.size() != emissions.rows()) {
    throw ArgumentError("path of length " + std::to_string(path.size()) + " for " +
                        std::to_string(emissions.rows()) + " positions");
  }
  for (auto y : path) {
    if (y >= k) throw ArgumentError("tag index " + std::to_string(y) + " out of range");
  }
}

// alpha[t][j] = log-sum over paths ending in tag j at position t.
std::vector<std::vector<double>> forward_table(const Tensor& em, const CrfParams& crf) {
  const std::size_t T = em.rows(), K = crf.num_tags();
  const Tensor& A = crf.transitions.value();
  std::vector<std::vector<double>> alpha(T, std::vector<double>(K));
  for (std::size_t j = 0; j < K; ++j) alpha[0][j] = crf.start.value()[j] + em.at(0, j);
  std::vector<double> scratch(K);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t i = 0; i < K; ++i) scratch[i] = alpha[t - 1][i] + A.at(i, j);
      alpha[t][j] = log_sum_exp(scratch) + em.at(t, j);
    }
  }
  return alpha;
}

std::vector<std::vector<double>> backward_table(const Tensor& em, const CrfParams& crf) {
  const std::size_t T = em.rows(), K = crf.num_tags();
  const Tensor& A = crf.transitions.value();
  std::vector<std::vector<double>> beta(T, std::vector<double>(K));
  for (std::size_t j = 0; j < K; ++j) beta[T - 1][j] = crf.stop.value()[j];
  std::vector<double> scratch(K);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) scratch[j] = A.at(i, j) + em.at(t + 1, j) + beta[t + 1][j];
      beta[t][i] = log_sum_exp(scratch);
    }
  }
  return beta;
}

}  // namespace

double crf_score(const Tensor& emissions, std::span<const std::size_t> path, const CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  check_emissions(emissions, K);
  check_path(emissions, path, K);
  double s = crf.start.value()[path.front()] + crf.stop.value()[path.back()];
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += emissions.at(t, path[t]);
    if (t > 0) s += crf.transitions.value().at(path[t - 1], path[t]);
  }
  return s;
}

double crf_log_partition(const Tensor& emissions, const CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  check_emissions(emissions, K);
  const auto alpha = forward_table(emissions, crf);
  std::vector<double> last(K);
  for (std::size_t j = 0; j < K; ++j) last[j] = alpha.back()[j] + crf.stop.value()[j];
  return log_sum_exp(last);
}

double crf_nll(const Tensor& emissions, std::span<const std::size_t> gold, const CrfParams& crf) {
  return crf_log_partition(emissions, crf) - crf_score(emissions, gold, crf);
}

ViterbiResult viterbi(const Tensor& emissions, const CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  check_emissions(emissions, K);
  const std::size_t T = emissions.rows();
  const Tensor& A = crf.transitions.value();
  std::vector<double> best(K), next(K);
  std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(K, 0));
  for (std::size_t j = 0; j < K; ++j) best[j] = crf.start.value()[j] + emissions.at(0, j);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      std::size_t arg = 0;
      double top = best[0] + A.at(0, j);
      for (std::size_t i = 1; i < K; ++i) {
        const double s = best[i] + A.at(i, j);
        if (s > top) {
          top = s;
          arg = i;
        }
      }
      next[j] = top + emissions.at(t, j);
      back[t][j] = arg;
    }
    best.swap(next);
  }
  std::size_t arg = 0;
  double top = best[0] + crf.stop.value()[0];
  for (std::size_t j = 1; j < K; ++j) {
    const double s = best[j] + crf.stop.value()[j];
    if (s > top) {
      top = s;
      arg = j;
    }
  }
  ViterbiResult out;
  out.score = top;
  out.path.assign(T, 0);
  out.path[T - 1] = arg;
  for (std::size_t t = T - 1; t > 0; --t) out.path[t - 1] = back[t][out.path[t]];
  return out;
}

Tensor crf_marginals(const Tensor& emissions, const CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  check_emissions(emissions, K);
  const auto alpha = forward_table(emissions, crf);
  const auto beta = backward_table(emissions, crf);
  const double log_z = crf_log_partition(emissions, crf);
  Tensor out(emissions.shape());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    for (std::size_t j = 0; j < K; ++j) out.at(t, j) = std::exp(alpha[t][j] + beta[t][j] - log_z);
  }
  return out;
}

Var crf_score(Graph& g, Var emissions, std::span<const std::size_t> path, CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  const Tensor& em = g.value(emissions);
  check_emissions(em, K);
  check_path(em, path, K);
  Var start = g.param(crf.start), stop = g.param(crf.stop), trans = g.param(crf.transitions);
  std::vector<Var> terms;
  terms.reserve(2 * path.size() + 1);
  terms.push_back(g.slice(start, path.front(), 1));
  for (std::size_t t = 0; t < path.size(); ++t) {
    terms.push_back(g.slice(emissions, t * K + path[t], 1));
    if (t > 0) terms.push_back(g.slice(trans, path[t - 1] * K + path[t], 1));
  }
  terms.push_back(g.slice(stop, path.back(), 1));
  return g.sum(g.concat(terms));
}

Var crf_log_partition(Graph& g, Var emissions, CrfParams& crf) {
  const std::size_t K = crf.num_tags();
  const Tensor& em = g.value(emissions);
  check_emissions(em, K);
  const std::size_t T = em.rows();
  Var trans = g.param(crf.transitions);
  Var alpha = g.add(g.param(crf.start), g.slice(emissions, 0, K));
  std::vector<Var> columns;
  for (std::size_t j = 0; j < K; ++j) columns.push_back(g.slice(trans, j, K, K));
  for (std::size_t t = 1; t < T; ++t) {
    std::vector<Var> next;
    next.reserve(K);
    for (std::size_t j = 0; j < K; ++j) next.push_back(g.log_sum_exp(g.add(alpha, columns[j])));
    alpha = g.add(g.concat(next), g.slice(emissions, t * K, K));
  }
  return g.log_sum_exp(g.add(alpha, g.param(crf.stop)));
}

Var crf_nll(Graph& g, Var emissions, std::span<const std::size_t> gold, CrfParams& crf) {
  return sub(g, crf_log_partition(g, emissions, crf), crf_score(g, emissions, gold, crf));
}

}  // namespace metatag
