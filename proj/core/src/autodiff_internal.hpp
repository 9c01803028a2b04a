#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sest/autodiff.hpp"

namespace sest::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
  ~Node();

  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

struct Access {
  static const std::shared_ptr<detail::Node>& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(std::shared_ptr<detail::Node> n) { return Tensor(std::move(n)); }
};

}  // namespace sest::ad
