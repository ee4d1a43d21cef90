#pragma once

#include <string>
#include <vector>

#include "metatag/graph.hpp"
#include "metatag/rng.hpp"
#include "metatag/tensor.hpp"

namespace metatag::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Scalar sum(x * r) with a fixed random r, so every output element gets a
// distinct upstream gradient.
inline Var weighted_sum(Graph& g, Var x, Rng& rng) {
  Tensor weights = random_tensor(g.value(x).shape(), rng);
  return g.sum(g.mask_mul(x, std::move(weights)));
}

inline std::string temp_path(const std::string& name) {
  return std::string(METATAG_TEST_TMP) + "/" + name;
}

}  // namespace metatag::testing
