#pragma once

#include <span>

#include "sgscn/autodiff.hpp"

namespace sgscn {

/// 3x3 convolution, stride 1, zero padding 1 (the only configuration the
/// network uses; anything else is rejected). input [Ci,H,W], weight
/// [Co,Ci,3,3], bias [Co] -> [Co,H,W].
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, int stride = 1,
              int pad = 1);

/// Elementwise max(x, 0). Subgradient at exactly 0 is 0.
template <typename T>
Var<T> relu(const Var<T>& x);

/// Per-channel standardisation over the HxW plane using the population
/// variance: (x - mean) / sqrt(var + eps). No affine parameters.
template <typename T>
Var<T> channel_norm(const Var<T>& x, T eps);

/// Softmax across channels at every pixel (max-subtracted).
template <typename T>
Var<T> softmax_channels(const Var<T>& x);

template <typename T>
Var<T> sum(const Var<T>& x);

/// sum_i x[i] * w[i] against a constant tensor of the same shape.
template <typename T>
Var<T> dot(const Var<T>& x, const Tensor<T>& w);

template <typename T>
Var<T> square(const Var<T>& x);

/// sum_i coeffs[i] * terms[i] over scalar terms.
template <typename T>
Var<T> weighted_sum(std::span<const Var<T>> terms, std::span<const T> coeffs);

}  // namespace sgscn
