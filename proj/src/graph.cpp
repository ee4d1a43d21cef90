#include "metatag/graph.hpp"

#include <cmath>

#include "metatag/error.hpp"

namespace metatag {

Parameter::Parameter(std::string name, Tensor value)
    : name_(std::move(name)), value_(std::move(value)), grad_(value_.shape()) {}

Var Graph::push(Node node) {
  node.needs_grad = node.parameter != nullptr;
  for (auto p : node.parents) node.needs_grad = node.needs_grad || nodes_[p].needs_grad;
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw ArgumentError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.parameter ? n.parameter->value() : n.value;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.parameter ? n.parameter->grad() : n.grad;
}

Tensor& Graph::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  return n.parameter ? n.parameter->grad() : n.grad;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = OpKind::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::param(Parameter& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end()) return Var{it->second};
  Node n;
  n.op = OpKind::kParameter;
  n.parameter = &parameter;
  Var v = push(std::move(n));
  bound_.emplace(&parameter, v.id);
  return v;
}

Var Graph::matmul(Var a, Var b) {
  Node n;
  n.op = OpKind::kMatMul;
  n.value = metatag::matmul(value(a), value(b));
  n.parents = {a.id, b.id};
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.shape() != y.shape()) {
    throw DimensionError("add: shapes " + shape_string(x.shape()) + " and " +
                         shape_string(y.shape()) + " differ");
  }
  Node n;
  n.op = OpKind::kAdd;
  n.value = x;
  for (std::size_t i = 0; i < x.size(); ++i) n.value[i] += y[i];
  n.parents = {a.id, b.id};
  return push(std::move(n));
}

Var Graph::bias_add(Var x, Var bias) {
  const Tensor& m = value(x);
  const Tensor& b = value(bias);
  if (b.rank() != 1 || m.cols() != b.size() || m.rank() > 2) {
    throw DimensionError("bias_add: cannot add bias " + shape_string(b.shape()) + " to " +
                         shape_string(m.shape()));
  }
  Node n;
  n.op = OpKind::kBiasAdd;
  n.value = m;
  const std::size_t c = b.size();
  for (std::size_t i = 0; i < m.size(); ++i) n.value[i] += b[i % c];
  n.parents = {x.id, bias.id};
  return push(std::move(n));
}

Var Graph::tanh(Var x) {
  Node n;
  n.op = OpKind::kTanh;
  n.value = value(x);
  for (auto& v : n.value.values()) v = std::tanh(v);
  n.parents = {x.id};
  return push(std::move(n));
}

Var Graph::sigmoid(Var x) {
  Node n;
  n.op = OpKind::kSigmoid;
  n.value = value(x);
  for (auto& v : n.value.values()) v = 1.0 / (1.0 + std::exp(-v));
  n.parents = {x.id};
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.shape() != y.shape()) {
    throw DimensionError("mul: shapes " + shape_string(x.shape()) + " and " +
                         shape_string(y.shape()) + " differ");
  }
  Node n;
  n.op = OpKind::kMul;
  n.value = x;
  for (std::size_t i = 0; i < x.size(); ++i) n.value[i] *= y[i];
  n.parents = {a.id, b.id};
  return push(std::move(n));
}

Var Graph::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat of zero operands");
  std::vector<double> out;
  Node n;
  n.op = OpKind::kConcat;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != 1) throw DimensionError("concat: operand " + shape_string(t.shape()) + " is not a vector");
    out.insert(out.end(), t.values().begin(), t.values().end());
    n.parents.push_back(p.id);
  }
  n.value = Tensor::vector(std::move(out));
  return push(std::move(n));
}

Var Graph::stack(std::span<const Var> rows) {
  if (rows.empty()) throw ArgumentError("stack of zero operands");
  const Tensor& first = value(rows.front());
  if (first.rank() != 1) throw DimensionError("stack: operand " + shape_string(first.shape()) + " is not a vector");
  const std::size_t width = first.size();
  std::vector<double> out;
  out.reserve(width * rows.size());
  Node n;
  n.op = OpKind::kStack;
  for (Var r : rows) {
    const Tensor& t = value(r);
    if (t.shape() != first.shape()) {
      throw DimensionError("stack: rows " + shape_string(first.shape()) + " and " +
                           shape_string(t.shape()) + " differ");
    }
    out.insert(out.end(), t.values().begin(), t.values().end());
    n.parents.push_back(r.id);
  }
  n.value = Tensor::matrix(rows.size(), width, std::move(out));
  return push(std::move(n));
}

Var Graph::slice(Var x, std::size_t offset, std::size_t length, std::size_t stride) {
  const Tensor& t = value(x);
  if (length == 0 || stride == 0 || offset + (length - 1) * stride >= t.size()) {
    throw DimensionError("slice: offset " + std::to_string(offset) + ", length " +
                         std::to_string(length) + ", stride " + std::to_string(stride) +
                         " out of range for " + shape_string(t.shape()));
  }
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = t[offset + i * stride];
  Node n;
  n.op = OpKind::kSlice;
  n.value = Tensor::vector(std::move(out));
  n.parents = {x.id};
  n.offset = offset;
  n.stride = stride;
  return push(std::move(n));
}

Var Graph::softmax(Var x) {
  const Tensor& t = value(x);
  if (t.rank() != 1) throw DimensionError("softmax: operand " + shape_string(t.shape()) + " is not a vector");
  Node n;
  n.op = OpKind::kSoftmax;
  n.value = Tensor::vector(metatag::softmax(t.values()));
  n.parents = {x.id};
  return push(std::move(n));
}

Var Graph::log_sum_exp(Var x) {
  const Tensor& t = value(x);
  Node n;
  n.op = OpKind::kLogSumExp;
  n.value = Tensor::scalar(metatag::log_sum_exp(t.values()));
  n.aux = Tensor(t.shape(), metatag::softmax(t.values()));
  n.parents = {x.id};
  return push(std::move(n));
}

Var Graph::sum(Var x) {
  double total = 0.0;
  for (double v : value(x).values()) total += v;
  Node n;
  n.op = OpKind::kSum;
  n.value = Tensor::scalar(total);
  n.parents = {x.id};
  return push(std::move(n));
}

Var Graph::mask_mul(Var x, Tensor mask) {
  const Tensor& t = value(x);
  if (t.shape() != mask.shape()) {
    throw DimensionError("mask_mul: mask " + shape_string(mask.shape()) + " does not match " +
                         shape_string(t.shape()));
  }
  Node n;
  n.op = OpKind::kMaskMul;
  n.value = t;
  for (std::size_t i = 0; i < t.size(); ++i) n.value[i] *= mask[i];
  n.aux = std::move(mask);
  n.parents = {x.id};
  return push(std::move(n));
}

void Graph::backward(Var root) {
  const Tensor& rv = value(root);
  if (rv.size() != 1) {
    throw ArgumentError("backward needs a scalar root, got shape " + shape_string(rv.shape()));
  }
  std::vector<char> live(root.id + 1, 0);
  live[root.id] = 1;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    if (!live[id]) continue;
    for (auto p : nodes_[id].parents) {
      if (nodes_[p].needs_grad) live[p] = 1;
    }
  }
  for (std::size_t id = 0; id <= root.id; ++id) {
    Node& n = nodes_[id];
    if (!n.parameter) n.grad = live[id] ? Tensor(n.value.shape()) : Tensor();
  }
  grad_ref(root.id)[0] += 1.0;
  if (!nodes_[root.id].needs_grad) return;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    if (live[id]) propagate(id);
  }
}

void Graph::propagate(std::size_t id) {
  const Node& n = nodes_[id];
  if (n.op == OpKind::kConstant || n.op == OpKind::kParameter) return;
  const Tensor& g = n.grad;
  const Tensor& y = n.value;
  switch (n.op) {
    case OpKind::kMatMul: {
      const std::size_t ia = n.parents[0], ib = n.parents[1];
      const Tensor& a = value(Var{ia});
      const Tensor& b = value(Var{ib});
      const bool a_vec = a.rank() == 1;
      const bool b_vec = b.rank() == 1;
      const std::size_t m = a_vec ? 1 : a.shape()[0];
      const std::size_t k = a_vec ? a.shape()[0] : a.shape()[1];
      const std::size_t cols = b_vec ? 1 : b.shape()[1];
      double* pga = nodes_[ia].needs_grad ? grad_ref(ia).values().data() : nullptr;
      double* pgb = nodes_[ib].needs_grad ? grad_ref(ib).values().data() : nullptr;
      const double* pa = a.data().data();
      const double* pb = b.data().data();
      const double* pg = g.data().data();
      if (b_vec) {
        // y[i] = sum_p a[i,p] b[p]
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = pg[i];
          const double* arow = pa + i * k;
          if (pga) {
            double* garow = pga + i * k;
            for (std::size_t p = 0; p < k; ++p) garow[p] += gi * pb[p];
          }
          if (pgb) {
            for (std::size_t p = 0; p < k; ++p) pgb[p] += gi * arow[p];
          }
        }
        break;
      }
      // y[i,j] = sum_p a[i,p] b[p,j]
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = pg + i * cols;
        const double* arow = pa + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb + p * cols;
          if (pga) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * brow[j];
            pga[i * k + p] += acc;
          }
          if (pgb) {
            const double av = arow[p];
            double* gbrow = pgb + p * cols;
            for (std::size_t j = 0; j < cols; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
      break;
    }
    case OpKind::kAdd: {
      for (auto p : n.parents) {
        if (!nodes_[p].needs_grad) continue;
        Tensor& gp = grad_ref(p);
        for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
      }
      break;
    }
    case OpKind::kBiasAdd: {
      if (nodes_[n.parents[0]].needs_grad) {
        Tensor& gx = grad_ref(n.parents[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (nodes_[n.parents[1]].needs_grad) {
        Tensor& gb = grad_ref(n.parents[1]);
        const std::size_t c = gb.size();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
      }
      break;
    }
    case OpKind::kTanh: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case OpKind::kSigmoid: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case OpKind::kMul: {
      const std::size_t ia = n.parents[0], ib = n.parents[1];
      const Tensor& a = value(Var{ia});
      const Tensor& b = value(Var{ib});
      if (nodes_[ia].needs_grad) {
        Tensor& ga = grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (nodes_[ib].needs_grad) {
        Tensor& gb = grad_ref(ib);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
      break;
    }
    case OpKind::kConcat:
    case OpKind::kStack: {
      std::size_t pos = 0;
      for (auto p : n.parents) {
        const std::size_t width = value(Var{p}).size();
        if (nodes_[p].needs_grad) {
          Tensor& gp = grad_ref(p);
          for (std::size_t i = 0; i < width; ++i) gp[i] += g[pos + i];
        }
        pos += width;
      }
      break;
    }
    case OpKind::kSlice: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[n.offset + i * n.stride] += g[i];
      break;
    }
    case OpKind::kSoftmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dot);
      break;
    }
    case OpKind::kLogSumExp: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0] * n.aux[i];
      break;
    }
    case OpKind::kSum: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
      break;
    }
    case OpKind::kMaskMul: {
      Tensor& gx = grad_ref(n.parents[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux[i];
      break;
    }
    case OpKind::kConstant:
    case OpKind::kParameter:
      break;
  }
}

Var sub(Graph& g, Var a, Var b) {
  return g.add(a, g.mask_mul(b, Tensor(g.value(b).shape(), -1.0)));
}

Var scale(Graph& g, Var x, double factor) {
  return g.mask_mul(x, Tensor(g.value(x).shape(), factor));
}

}  // namespace metatag
