#pragma once

#include "metatag/rng.hpp"
#include "metatag/tensor.hpp"

namespace metatag {

// Uniform in +-sqrt(6 / (fan_in + fan_out)) for a rows x cols weight matrix.
Tensor scaled_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace metatag
