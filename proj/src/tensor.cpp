#include <cmath>
#include <unordered_set>

#include "sgscn/autodiff.hpp"
#include "sgscn/grid.hpp"
#include "sgscn/tensor.hpp"

namespace sgscn {

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
T Var<T>::item() const {
  if (node_->value.numel() != 1) {
    throw ShapeError("item: tensor of shape " + to_string(node_->value.shape()) +
                     " is not a scalar");
  }
  return node_->value[0];
}

template <typename T>
void Var<T>::backward() const {
  if (node_->value.numel() != 1) {
    throw ShapeError("backward: root must be a single-element tensor, got shape " +
                     to_string(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node<T>* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

std::size_t count_distinct(const LabelMap& labels) {
  std::unordered_set<std::int32_t> s(labels.values.begin(), labels.values.end());
  return s.size();
}

std::size_t boundary_length(const LabelMap& labels) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < labels.rows; ++r) {
    for (std::size_t c = 0; c < labels.cols; ++c) {
      if (c + 1 < labels.cols && labels(r, c) != labels(r, c + 1)) ++n;
      if (r + 1 < labels.rows && labels(r, c) != labels(r + 1, c)) ++n;
    }
  }
  return n;
}

template class Tensor<float>;
template class Tensor<double>;
template class Var<float>;
template class Var<double>;

}  // namespace sgscn
