#include "sest/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "autodiff_internal.hpp"
#include "sest/error.hpp"

namespace sest::ad {

namespace detail {

// Releases the parent chain iteratively; recurrent graphs are deep enough to
// overflow the stack with recursive shared_ptr destruction.
Node::~Node() {
  std::vector<std::shared_ptr<Node>> pending = std::move(parents);
  while (!pending.empty()) {
    std::shared_ptr<Node> p = std::move(pending.back());
    pending.pop_back();
    if (p && p.use_count() == 1) {
      for (auto& q : p->parents) pending.push_back(std::move(q));
      p->parents.clear();
    }
  }
}

}  // namespace detail

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

const NodePtr& node_of(const Tensor& t) {
  const auto& n = Access::node(t);
  if (!n) throw ArgumentError("operation on an undefined tensor");
  return n;
}

Tensor make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.size()) {
    throw ShapeError("tensor of shape " + to_string(shape) + " given " + std::to_string(values.size()) + " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Access::wrap(std::move(n));
}

// Builds an op result; the graph edge and backward closure are kept only
// when some input requires a gradient.
Tensor make_op(Shape shape, std::vector<double> value, std::vector<NodePtr> parents,
               std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(value);
  const bool rg = std::any_of(parents.begin(), parents.end(), [](const NodePtr& p) { return p->requires_grad; });
  if (rg) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return Access::wrap(std::move(n));
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) shape_mismatch(op, a.shape(), b.shape());
}

template <typename F, typename D>
Tensor unary_map(const Tensor& x, F forward, D derivative_from_xy) {
  const auto& xn = node_of(x);
  std::vector<double> y(xn->value.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = forward(xn->value[i]);
  return make_op(xn->shape, std::move(y), {xn}, [derivative_from_xy](Node& self) {
    Node& in = *self.parents[0];
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * derivative_from_xy(in.value[i], self.value[i]);
  });
}

enum class Broadcast { kColumn, kRow };

Broadcast broadcast_kind(const char* op, const Tensor& x, const Tensor& v) {
  if (v.cols() == 1 && v.rows() == x.rows()) return Broadcast::kColumn;
  if (v.rows() == 1 && v.cols() == x.cols()) return Broadcast::kRow;
  shape_mismatch(op, x.shape(), v.shape());
}

}  // namespace

std::string to_string(const Shape& shape) { return std::to_string(shape.rows) + "x" + std::to_string(shape.cols); }

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::constant(Shape shape, std::vector<double> values) { return make_leaf(shape, std::move(values), false); }

Tensor Tensor::zeros(Shape shape) { return make_leaf(shape, std::vector<double>(shape.size(), 0.0), false); }

Tensor Tensor::scalar(double value) { return make_leaf({1, 1}, {value}, false); }

Tensor Tensor::column(std::vector<double> values) {
  const std::size_t n = values.size();
  return make_leaf({n, 1}, std::move(values), false);
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) { return make_leaf(shape, std::move(values), true); }

const Shape& Tensor::shape() const { return node_of(*this)->shape; }

std::span<const double> Tensor::values() const { return node_of(*this)->value; }

std::span<double> Tensor::mutable_values() { return node_of(*this)->value; }

double Tensor::at(std::size_t r, std::size_t c) const {
  const auto& n = node_of(*this);
  if (r >= n->shape.rows || c >= n->shape.cols) throw ArgumentError("tensor index out of range");
  return n->value[r * n->shape.cols + c];
}

double Tensor::item() const {
  const auto& n = node_of(*this);
  if (n->shape.size() != 1) throw ArgumentError("item() on tensor of shape " + to_string(n->shape));
  return n->value[0];
}

bool Tensor::requires_grad() const { return node_of(*this)->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  const auto& n = node_of(*this);
  if (!n->parents.empty()) throw StateError("requires_grad can only be changed on leaf tensors");
  n->requires_grad = on;
  if (!on) n->grad.clear();
}

bool Tensor::has_grad() const {
  const auto& n = node_of(*this);
  return !n->grad.empty() && n->grad.size() == n->value.size();
}

std::span<const double> Tensor::grad() const { return node_of(*this)->grad; }

void Tensor::zero_grad() { node_of(*this)->grad.assign(size(), 0.0); }

// ---- primitive ops ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& an = node_of(a);
  const auto& bn = node_of(b);
  const std::size_t m = an->shape.rows, k = an->shape.cols, n = bn->shape.cols;
  if (k != bn->shape.rows) shape_mismatch("matmul", an->shape, bn->shape);
  std::vector<double> c(m * n, 0.0);
  const double* A = an->value.data();
  const double* B = bn->value.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return make_op({m, n}, std::move(c), {an, bn}, [m, k, n](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    const double* G = self.grad.data();
    if (A.requires_grad) {
      auto& ga = A.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = B.value.data() + p * n;
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
          ga[i * k + p] += s;
        }
      }
    }
    if (B.requires_grad) {
      auto& gb = B.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A.value[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  const auto& an = node_of(a);
  const auto& bn = node_of(b);
  std::vector<double> y(an->value.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = an->value[i] + bn->value[i];
  return make_op(an->shape, std::move(y), {an, bn}, [](Node& self) {
    for (int p = 0; p < 2; ++p) {
      Node& in = *self.parents[static_cast<std::size_t>(p)];
      if (!in.requires_grad) continue;
      auto& g = in.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  const auto& an = node_of(a);
  const auto& bn = node_of(b);
  std::vector<double> y(an->value.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = an->value[i] - bn->value[i];
  return make_op(an->shape, std::move(y), {an, bn}, [](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    if (A.requires_grad) {
      auto& g = A.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (B.requires_grad) {
      auto& g = B.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul_elementwise", a, b);
  const auto& an = node_of(a);
  const auto& bn = node_of(b);
  std::vector<double> y(an->value.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = an->value[i] * bn->value[i];
  return make_op(an->shape, std::move(y), {an, bn}, [](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    if (A.requires_grad) {
      auto& g = A.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * B.value[i];
    }
    if (B.requires_grad) {
      auto& g = B.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * A.value[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary_map(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ArgumentError("concat_rows of zero tensors");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_mismatch("concat_rows", parts[0].shape(), p.shape());
    rows += p.rows();
    parents.push_back(node_of(p));
  }
  std::vector<double> y;
  y.reserve(rows * cols);
  for (const auto& p : parents) y.insert(y.end(), p->value.begin(), p->value.end());
  return make_op({rows, cols}, std::move(y), std::move(parents), [](Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      const std::size_t n = p->value.size();
      if (p->requires_grad) {
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols of zero tensors");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_mismatch("concat_cols", parts[0].shape(), p.shape());
    cols += p.cols();
    parents.push_back(node_of(p));
  }
  std::vector<double> y(rows * cols);
  std::size_t col0 = 0;
  for (const auto& p : parents) {
    const std::size_t pc = p->shape.cols;
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(p->value.data() + r * pc, pc, y.data() + r * cols + col0);
    }
    col0 += pc;
  }
  return make_op({rows, cols}, std::move(y), std::move(parents), [rows, cols](Node& self) {
    std::size_t c0 = 0;
    for (auto& p : self.parents) {
      const std::size_t pc = p->shape.cols;
      if (p->requires_grad) {
        auto& g = p->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < pc; ++c) g[r * pc + c] += self.grad[r * cols + c0 + c];
        }
      }
      c0 += pc;
    }
  });
}

Tensor tanh(const Tensor& x) {
  return unary_map(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_map(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_map(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax_vec(const Tensor& x) {
  const auto& xn = node_of(x);
  if (!xn->shape.is_vector()) throw ShapeError("softmax_vec expects a vector, got " + to_string(xn->shape));
  if (xn->value.empty()) throw ArgumentError("softmax over an empty vector");
  const double mx = *std::max_element(xn->value.begin(), xn->value.end());
  std::vector<double> y(xn->value.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::exp(xn->value[i] - mx);
    total += y[i];
  }
  for (auto& v : y) v /= total;
  return make_op(xn->shape, std::move(y), {xn}, [](Node& self) {
    Node& in = *self.parents[0];
    double dot = 0.0;
    for (std::size_t i = 0; i < self.value.size(); ++i) dot += self.grad[i] * self.value[i];
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.value[i] * (self.grad[i] - dot);
  });
}

Tensor max_over_rows(const Tensor& x) {
  const auto& xn = node_of(x);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  if (c == 0) throw ArgumentError("max_over_rows on a tensor with no columns");
  std::vector<double> y(r);
  std::vector<std::size_t> arg(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (xn->value[i * c + j] > xn->value[i * c + best]) best = j;
    }
    arg[i] = i * c + best;
    y[i] = xn->value[arg[i]];
  }
  return make_op({r, 1}, std::move(y), {xn}, [arg = std::move(arg)](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < arg.size(); ++i) g[arg[i]] += self.grad[i];
  });
}

Tensor max_over_cols(const Tensor& x) {
  const auto& xn = node_of(x);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  if (r == 0) throw ArgumentError("max_over_cols on a tensor with no rows");
  std::vector<double> y(c);
  std::vector<std::size_t> arg(c);
  for (std::size_t j = 0; j < c; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < r; ++i) {
      if (xn->value[i * c + j] > xn->value[best * c + j]) best = i;
    }
    arg[j] = best * c + j;
    y[j] = xn->value[arg[j]];
  }
  return make_op({1, c}, std::move(y), {xn}, [arg = std::move(arg)](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t j = 0; j < arg.size(); ++j) g[arg[j]] += self.grad[j];
  });
}

Tensor pick(const Tensor& x, std::size_t index) {
  const auto& xn = node_of(x);
  if (index >= xn->value.size()) {
    throw ArgumentError("pick index " + std::to_string(index) + " out of range for " + to_string(xn->shape));
  }
  return make_op({1, 1}, {xn->value[index]}, {xn}, [index](Node& self) {
    self.parents[0]->ensure_grad()[index] += self.grad[0];
  });
}

Tensor neg_log(const Tensor& x) {
  return unary_map(
      x, [](double v) { return -std::log(std::max(v, kLogFloor)); },
      [](double v, double) { return v >= kLogFloor ? -1.0 / v : 0.0; });
}

Tensor apply(OpKind kind, std::span<const Tensor> inputs, std::size_t index) {
  auto arity = [&](std::size_t n, const char* name) {
    if (inputs.size() != n) {
      throw ArgumentError(std::string(name) + " expects " + std::to_string(n) + " inputs, got " +
                          std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::kMatmul: arity(2, "matmul"); return matmul(inputs[0], inputs[1]);
    case OpKind::kAdd: arity(2, "add"); return add(inputs[0], inputs[1]);
    case OpKind::kMulElementwise: arity(2, "mul_elementwise"); return mul(inputs[0], inputs[1]);
    case OpKind::kConcatRows: return concat_rows(inputs);
    case OpKind::kTanh: arity(1, "tanh"); return tanh(inputs[0]);
    case OpKind::kSigmoid: arity(1, "sigmoid"); return sigmoid(inputs[0]);
    case OpKind::kRelu: arity(1, "relu"); return relu(inputs[0]);
    case OpKind::kSoftmaxVec: arity(1, "softmax_vec"); return softmax_vec(inputs[0]);
    case OpKind::kMaxOverRows: arity(1, "max_over_rows"); return max_over_rows(inputs[0]);
    case OpKind::kMaxOverCols: arity(1, "max_over_cols"); return max_over_cols(inputs[0]);
    case OpKind::kPick: arity(1, "pick"); return pick(inputs[0], index);
    case OpKind::kNegLog: arity(1, "neg_log"); return neg_log(inputs[0]);
  }
  throw ArgumentError("unknown op kind");
}

// ---- structural helpers -----------------------------------------------------

Tensor transpose(const Tensor& x) {
  const auto& xn = node_of(x);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  std::vector<double> y(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[j * r + i] = xn->value[i * c + j];
  return make_op({c, r}, std::move(y), {xn}, [r, c](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  const auto& xn = node_of(x);
  const std::size_t c = xn->shape.cols;
  if (begin + count > xn->shape.rows) {
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for " + to_string(xn->shape));
  }
  std::vector<double> y(xn->value.begin() + static_cast<std::ptrdiff_t>(begin * c),
                        xn->value.begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return make_op({count, c}, std::move(y), {xn}, [offset = begin * c](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
  });
}

Tensor column(const Tensor& x, std::size_t j) {
  const auto& xn = node_of(x);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  if (j >= c) throw ShapeError("column " + std::to_string(j) + " out of range for " + to_string(xn->shape));
  std::vector<double> y(r);
  for (std::size_t i = 0; i < r; ++i) y[i] = xn->value[i * c + j];
  return make_op({r, 1}, std::move(y), {xn}, [j, c](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i * c + j] += self.grad[i];
  });
}

Tensor row(const Tensor& x, std::size_t i) {
  const auto& xn = node_of(x);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  if (i >= r) throw ShapeError("row " + std::to_string(i) + " out of range for " + to_string(xn->shape));
  std::vector<double> y(xn->value.begin() + static_cast<std::ptrdiff_t>(i * c),
                        xn->value.begin() + static_cast<std::ptrdiff_t>((i + 1) * c));
  return make_op({c, 1}, std::move(y), {xn}, [offset = i * c](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t k = 0; k < self.grad.size(); ++k) g[offset + k] += self.grad[k];
  });
}

Tensor add_broadcast(const Tensor& x, const Tensor& v) {
  const Broadcast kind = broadcast_kind("add_broadcast", x, v);
  const auto& xn = node_of(x);
  const auto& vn = node_of(v);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  std::vector<double> y(xn->value);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] += vn->value[kind == Broadcast::kColumn ? i : j];
  return make_op(xn->shape, std::move(y), {xn, vn}, [kind, r, c](Node& self) {
    Node& X = *self.parents[0];
    Node& V = *self.parents[1];
    if (X.requires_grad) {
      auto& g = X.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (V.requires_grad) {
      auto& g = V.ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[kind == Broadcast::kColumn ? i : j] += self.grad[i * c + j];
    }
  });
}

Tensor mul_broadcast(const Tensor& x, const Tensor& v) {
  const Broadcast kind = broadcast_kind("mul_broadcast", x, v);
  const auto& xn = node_of(x);
  const auto& vn = node_of(v);
  const std::size_t r = xn->shape.rows, c = xn->shape.cols;
  std::vector<double> y(xn->value);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] *= vn->value[kind == Broadcast::kColumn ? i : j];
  return make_op(xn->shape, std::move(y), {xn, vn}, [kind, r, c](Node& self) {
    Node& X = *self.parents[0];
    Node& V = *self.parents[1];
    if (X.requires_grad) {
      auto& g = X.ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          g[i * c + j] += self.grad[i * c + j] * V.value[kind == Broadcast::kColumn ? i : j];
    }
    if (V.requires_grad) {
      auto& g = V.ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          g[kind == Broadcast::kColumn ? i : j] += self.grad[i * c + j] * X.value[i * c + j];
    }
  });
}

Tensor sum(const Tensor& x) {
  const auto& xn = node_of(x);
  double s = 0.0;
  for (double v : xn->value) s += v;
  return make_op({1, 1}, {s}, {xn}, [](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

// ---- backward ---------------------------------------------------------------

void backward(const Tensor& loss) {
  const auto& root = node_of(loss);
  if (root->shape.size() != 1) throw ArgumentError("backward needs a scalar loss, got " + to_string(root->shape));
  if (!root->requires_grad) return;

  // Iterative post-order DFS over interior nodes; leaves need no visit.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && !p->parents.empty() && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

}  // namespace sest::ad
