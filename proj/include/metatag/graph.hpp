#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metatag/tensor.hpp"

namespace metatag {

// A named trainable tensor with its gradient accumulator. Gradients from
// successive backward passes add up until zero_grad() is called.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }
  void zero_grad() { grad_.fill(0.0); }

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
};

// Handle to a node in one Graph. Only meaningful for the graph that made it.
struct Var {
  std::size_t id = 0;
};

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,
  kAdd,
  kBiasAdd,
  kTanh,
  kSigmoid,
  kMul,
  kConcat,
  kStack,
  kSlice,
  kSoftmax,
  kLogSumExp,
  kSum,
  kMaskMul,
};

// Tape of differentiable operations. Nodes are appended in evaluation order,
// so the node list is already topologically sorted.
//
// A graph is built and differentiated by a single thread; the resulting
// values may be read concurrently once construction is finished.
class Graph {
 public:
  Var constant(Tensor value);
  // Leaf bound to a parameter; repeated calls for the same parameter return
  // the same node. Gradients flow into parameter.grad().
  Var param(Parameter& parameter);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // Matrix (r x c) plus vector (c) added to every row; vector plus vector.
  Var bias_add(Var x, Var bias);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var mul(Var a, Var b);
  // Joins vectors end to end.
  Var concat(std::span<const Var> parts);
  // Stacks equal-length vectors as the rows of a matrix.
  Var stack(std::span<const Var> rows);
  // Picks `length` values starting at flat index `offset`, `stride` apart.
  Var slice(Var x, std::size_t offset, std::size_t length, std::size_t stride = 1);
  Var softmax(Var x);
  Var log_sum_exp(Var x);
  Var sum(Var x);
  // Elementwise product with a constant (dropout masks, sign flips).
  Var mask_mul(Var x, Tensor mask);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  OpKind op(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar root. Node accumulators are reset first;
  // parameter gradients accumulate across calls.
  void backward(Var root);

 private:
  struct Node {
    OpKind op = OpKind::kConstant;
    std::vector<std::size_t> parents;
    Tensor value;
    Tensor grad;
    Parameter* parameter = nullptr;
    std::size_t offset = 0;
    std::size_t stride = 1;
    Tensor aux;
    bool needs_grad = false;  // some parameter lies upstream
  };

  Var push(Node node);
  const Node& node(Var v) const;
  Tensor& grad_ref(std::size_t id);
  void propagate(std::size_t id);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
};

// Composite helpers built from the closed op set.
Var sub(Graph& g, Var a, Var b);
Var scale(Graph& g, Var x, double factor);

}  // namespace metatag
