#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "sgscn/tensor.hpp"

namespace sgscn {

/// One value on the dynamic tape. Ops build a fresh graph of nodes on every
/// forward pass; `backward` closures accumulate into their inputs' grads.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  Tensor<T>& grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Handle to a tape node. Cheap to copy (shared ownership of the node).
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }

  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad = Tensor<T>(); }
  /// Scalar value of a one-element tensor.
  T item() const;

  /// Reverse-mode sweep from this (single-element) node. Every reachable node
  /// with requires_grad gets a populated grad; each node is visited once.
  void backward() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Creates an op node. If no input requires a gradient the node is detached
/// (no inputs kept, no backward closure).
template <typename T>
Var<T> make_op(const char* op, Tensor<T> value, std::vector<Var<T>> inputs,
               std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  for (const auto& in : inputs) n->requires_grad = n->requires_grad || in.requires_grad();
  if (n->requires_grad) {
    n->inputs.reserve(inputs.size());
    for (auto& in : inputs) n->inputs.push_back(in.shared());
    n->backward = std::move(backward);
  }
  return Var<T>(std::move(n));
}

}  // namespace sgscn
