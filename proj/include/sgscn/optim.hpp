#pragma once

#include <string>
#include <vector>

#include "sgscn/autodiff.hpp"

namespace sgscn {

/// A learnable tensor plus its momentum buffer.
template <typename T>
struct Parameter {
  std::string name;
  Var<T> var;
  Tensor<T> velocity;
};

/// All learnable state of a model, in a fixed order.
template <typename T>
struct ParamSet {
  std::vector<Parameter<T>> entries;

  std::size_t size() const noexcept { return entries.size(); }
  Parameter<T>& operator[](std::size_t i) { return entries[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return entries[i]; }

  void zero_grad() {
    for (auto& p : entries) p.var.zero_grad();
  }
  bool all_finite() const {
    for (const auto& p : entries) {
      if (!p.var.value().all_finite()) return false;
    }
    return true;
  }
};

/// Heavy-ball SGD: v <- momentum*v + g ; p <- p - lr*v ; then clears grads.
/// Throws if any parameter has no gradient (backward was not run).
template <typename T>
void sgd_step(ParamSet<T>& params, T lr, T momentum);

}  // namespace sgscn
