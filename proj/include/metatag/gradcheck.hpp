#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "metatag/graph.hpp"

namespace metatag {

struct GradCheckReport {
  struct Entry {
    std::string parameter;
    double max_error = 0.0;
  };
  double max_error = 0.0;
  std::vector<Entry> per_parameter;
};

// Builds a scalar loss in a fresh graph.
using LossBuilder = std::function<Var(Graph&)>;

// Compares analytic gradients with central differences, coordinate by
// coordinate:  |analytic - (f(x+eps) - f(x-eps)) / 2eps| / max(1, |analytic|).
// Parameter gradients are overwritten.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> parameters,
                           double eps = 1e-5);

}  // namespace metatag
