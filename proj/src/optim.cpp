#include <algorithm>
#include <cmath>
#include <optional>

#include "sgscn/gradcheck.hpp"
#include "sgscn/optim.hpp"

namespace sgscn {

template <typename T>
void sgd_step(ParamSet<T>& params, T lr, T momentum) {
  for (const auto& p : params.entries) {
    if (!p.var.has_grad()) throw Error("sgd_step: parameter '" + p.name + "' has no gradient");
  }
  for (auto& p : params.entries) {
    Node<T>& node = *p.var.node();
    if (p.velocity.shape() != node.value.shape()) p.velocity = Tensor<T>(node.value.shape());
    for (std::size_t i = 0; i < node.value.numel(); ++i) {
      p.velocity[i] = momentum * p.velocity[i] + node.grad[i];
      node.value[i] -= lr * p.velocity[i];
    }
    p.var.zero_grad();
  }
}

template <typename T>
GradCheckResult<T> grad_check(const std::function<Var<T>(const Var<T>&)>& f, const Tensor<T>& x,
                              T h, T abs_floor, std::span<const std::size_t> indices,
                              const KinkPattern<T>& pattern, T refine_h) {
  auto xv = Var<T>::leaf(x, true);
  f(xv).backward();
  Tensor<T> analytic = xv.has_grad() ? xv.grad() : Tensor<T>(x.shape());

  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(x.numel());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = all;
  }
  const auto base = pattern ? pattern(x) : std::vector<std::uint8_t>{};

  GradCheckResult<T> result;
  Tensor<T> probe = x;
  // Central difference at step `step`; nullopt when a probe crosses a kink.
  auto central = [&](std::size_t i, T step) -> std::optional<T> {
    probe[i] = x[i] + step;
    bool kink = pattern && pattern(probe) != base;
    const T fp = kink ? T{0} : f(Var<T>::leaf(probe)).item();
    probe[i] = x[i] - step;
    kink = kink || (pattern && pattern(probe) != base);
    const T fm = kink ? T{0} : f(Var<T>::leaf(probe)).item();
    probe[i] = x[i];
    if (kink) return std::nullopt;
    return (fp - fm) / (T{2} * step);
  };
  for (std::size_t i : indices) {
    if (i >= x.numel()) throw Error("grad_check: index " + std::to_string(i) + " out of range");
    auto numeric_opt = central(i, h);
    if (!numeric_opt && refine_h > T{0}) {
      ++result.refined;
      numeric_opt = central(i, refine_h);
    }
    if (!numeric_opt) {
      ++result.skipped;
      continue;
    }
    const T numeric = *numeric_opt;
    const T a = analytic[i];
    const T denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
    const T err = std::abs(a - numeric) / denom;
    if (result.checked == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.autodiff_at_worst = a;
      result.numeric_at_worst = numeric;
    }
    ++result.checked;
  }
  return result;
}

template void sgd_step<float>(ParamSet<float>&, float, float);
template void sgd_step<double>(ParamSet<double>&, double, double);
template GradCheckResult<float> grad_check<float>(
    const std::function<Var<float>(const Var<float>&)>&, const Tensor<float>&, float, float,
    std::span<const std::size_t>, const KinkPattern<float>&, float);
template GradCheckResult<double> grad_check<double>(
    const std::function<Var<double>(const Var<double>&)>&, const Tensor<double>&, double, double,
    std::span<const std::size_t>, const KinkPattern<double>&, double);

}  // namespace sgscn
