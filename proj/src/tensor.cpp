#include "metatag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "metatag/error.hpp"

namespace metatag {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

std::size_t extent_product(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
  std::size_t n = 1;
  for (auto e : shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + shape_string(shape));
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  values_.assign(extent_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (extent_product(shape_) != values_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " needs " +
                         std::to_string(extent_product(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  // Supported forms: (m x k)(k x n), (m x k)(k), (k)(k x n).
  const bool a_vec = a.rank() == 1;
  const bool b_vec = b.rank() == 1;
  if (a.rank() > 2 || b.rank() > 2 || (a_vec && b_vec)) {
    throw DimensionError("matmul: unsupported operand shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a_vec ? 1 : a.shape()[0];
  const std::size_t k = a_vec ? a.shape()[0] : a.shape()[1];
  const std::size_t kb = b.shape()[0];
  const std::size_t n = b_vec ? 1 : b.shape()[1];
  if (k != kb) {
    throw DimensionError("matmul: inner extents differ for " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  Shape out_shape;
  if (a_vec) {
    out_shape = {n};
  } else if (b_vec) {
    out_shape = {m};
  } else {
    out_shape = {m, n};
  }
  Tensor out(out_shape);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.values().data();
  if (b_vec) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = pa + i * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * pb[p];
      po[i] = acc;
    }
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("softmax of an empty vector");
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("log_sum_exp of an empty vector");
  const double mx = *std::max_element(x.begin(), x.end());
  if (std::isinf(mx)) return mx;
  double total = 0.0;
  for (double v : x) total += std::exp(v - mx);
  return mx + std::log(total);
}

}  // namespace metatag
