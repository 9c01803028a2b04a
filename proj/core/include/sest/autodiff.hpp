#pragma once

// Reverse-mode automatic differentiation over dense row-major double
// matrices. Every op records its inputs; backward() walks the recorded graph
// from a scalar loss in reverse topological order. Vectors are n×1 (column)
// or 1×n (row) matrices.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sest::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool is_vector() const { return rows == 1 || cols == 1; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor scalar(double value);
  static Tensor column(std::vector<double> values);  // n×1 constant
  // Leaf that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t size() const { return shape().size(); }

  std::span<const double> values() const;
  // Direct write access for optimizers, loaders and finite differences.
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;  // value of a 1×1 tensor

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();  // allocates a zero-filled buffer

  // Identity of the underlying node (tensors are shared handles).
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct Access;
};

// The listed primitive set behind a single entry point; `index` is used only
// by kPick.
enum class OpKind {
  kMatmul,
  kAdd,
  kMulElementwise,
  kConcatRows,
  kTanh,
  kSigmoid,
  kRelu,
  kSoftmaxVec,
  kMaxOverRows,
  kMaxOverCols,
  kPick,
  kNegLog,
};

Tensor apply(OpKind kind, std::span<const Tensor> inputs, std::size_t index = 0);

inline constexpr double kLogFloor = 1e-12;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
// Softmax over all entries of a row or column vector.
Tensor softmax_vec(const Tensor& x);
// r×c -> r×1, maximum of each row.
Tensor max_over_rows(const Tensor& x);
// r×c -> 1×c, maximum of each column.
Tensor max_over_cols(const Tensor& x);
// Entry `index` (row-major) as a 1×1 tensor.
Tensor pick(const Tensor& x, std::size_t index);
// -log(max(x, kLogFloor)) elementwise; the floor has zero gradient.
Tensor neg_log(const Tensor& x);

// Structural helpers.
Tensor transpose(const Tensor& x);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor column(const Tensor& x, std::size_t j);     // r×1
Tensor row(const Tensor& x, std::size_t i);        // c×1 (transposed row; embedding lookup)
Tensor add_broadcast(const Tensor& x, const Tensor& v);  // v is r×1 or 1×c
Tensor mul_broadcast(const Tensor& x, const Tensor& v);  // v is r×1 or 1×c
Tensor sum(const Tensor& x);                       // 1×1

// Accumulates d(loss)/d(t) into every reachable tensor that requires grad.
void backward(const Tensor& loss);

// Named parameters with stable (sorted) iteration and Adam state.
class ParamStore {
 public:
  enum class Init { kXavier, kZeros, kConstant, kNormal };

  struct Entry {
    Tensor tensor;
    bool trainable = true;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
  };

  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  // Registers a parameter; values are drawn from a stream keyed by
  // (seed, name) so registration order does not matter.
  Tensor add(const std::string& name, Shape shape, Init init = Init::kXavier, double value = 0.0,
             bool trainable = true);
  // Registers a parameter with explicit values.
  Tensor add_values(const std::string& name, Shape shape, std::vector<double> values, bool trainable = true);

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  Tensor get(const std::string& name) const;
  std::vector<std::string> names() const;
  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t parameter_count() const;

  void zero_grad();
  std::uint64_t seed() const { return seed_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }

 private:
  std::uint64_t seed_;
  std::uint64_t step_ = 0;
  std::map<std::string, Entry> entries_;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components = 0;
};

// Compares backward() against central differences for every trainable
// component: |a-b| / max(1e-8, |a|+|b|).
GradCheckResult grad_check(const std::function<Tensor(ParamStore&)>& f, ParamStore& params, double eps);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update over trainable parameters in name order.
// Throws StateError when a trainable parameter has no gradient buffer.
void adam_step(ParamStore& params, const AdamConfig& cfg);

// Rescales gradients so their global L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace sest::ad
