#include "sgscn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "sgscn/kernels.hpp"

namespace sgscn {

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, int stride,
              int pad) {
  if (stride != 1 || pad != 1) {
    throw Error("conv2d: only stride 1 / pad 1 is supported (got stride " +
                std::to_string(stride) + ", pad " + std::to_string(pad) + ")");
  }
  const auto& x = input.value();
  const auto& w = weight.value();
  const auto& b = bias.value();
  require_rank3(x, "conv2d input");
  if (w.rank() != 4) {
    throw ShapeError("conv2d: weight must be rank 4 [Co,Ci,3,3], got " + to_string(w.shape()));
  }
  if (w.dim(2) != 3 || w.dim(3) != 3) {
    throw ShapeError("conv2d: weight dims 2,3 (kernel) are " + std::to_string(w.dim(2)) + "x" +
                     std::to_string(w.dim(3)) + ", expected 3x3");
  }
  if (w.dim(1) != x.dim(0)) {
    throw ShapeError("conv2d: weight dim 1 (input channels) is " + std::to_string(w.dim(1)) +
                     ", input dim 0 is " + std::to_string(x.dim(0)));
  }
  if (b.rank() != 1 || b.dim(0) != w.dim(0)) {
    throw ShapeError("conv2d: bias dim 0 is " + (b.rank() ? std::to_string(b.dim(0)) : "-") +
                     ", expected " + std::to_string(w.dim(0)) + " (output channels)");
  }
  const kernels::ConvDims d{x.dim(0), w.dim(0), x.dim(1), x.dim(2)};
  Tensor<T> out({d.out_channels, d.height, d.width});
  kernels::omp::conv3x3_forward(d, x.raw(), w.raw(), b.raw(), out.raw());

  return make_op<T>("conv2d", std::move(out), {input, weight, bias}, [d](Node<T>& self) {
    auto& in = *self.inputs[0];
    auto& wn = *self.inputs[1];
    auto& bn = *self.inputs[2];
    kernels::omp::conv3x3_backward(d, in.value.raw(), wn.value.raw(), self.grad.raw(),
                                   in.requires_grad ? in.grad_buffer().raw() : nullptr,
                                   wn.requires_grad ? wn.grad_buffer().raw() : nullptr,
                                   bn.requires_grad ? bn.grad_buffer().raw() : nullptr);
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x.shape());
  const auto& xv = x.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = xv[i] > T{0} ? xv[i] : T{0};
  return make_op<T>("relu", std::move(out), {x}, [](Node<T>& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (in.value[i] > T{0}) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> channel_norm(const Var<T>& x, T eps) {
  const auto& xv = x.value();
  require_rank3(xv, "channel_norm");
  const std::size_t C = xv.dim(0), n = xv.dim(1) * xv.dim(2);
  if (n < 2) {
    throw ShapeError("channel_norm: plane has " + std::to_string(n) + " pixels, need at least 2");
  }
  Tensor<T> out(xv.shape());
  std::vector<T> inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    const T* src = xv.raw() + c * n;
    T mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += src[i];
    mean /= static_cast<T>(n);
    T var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (src[i] - mean) * (src[i] - mean);
    var /= static_cast<T>(n);
    const T r = T{1} / std::sqrt(var + eps);
    inv_std[c] = r;
    T* dst = out.raw() + c * n;
    for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] - mean) * r;
  }
  return make_op<T>("channel_norm", std::move(out), {x},
                    [C, n, inv_std = std::move(inv_std)](Node<T>& self) {
                      auto& g = self.inputs[0]->grad_buffer();
                      for (std::size_t c = 0; c < C; ++c) {
                        const T* dy = self.grad.raw() + c * n;
                        const T* y = self.value.raw() + c * n;
                        T mean_dy = 0, mean_dyy = 0;
                        for (std::size_t i = 0; i < n; ++i) {
                          mean_dy += dy[i];
                          mean_dyy += dy[i] * y[i];
                        }
                        mean_dy /= static_cast<T>(n);
                        mean_dyy /= static_cast<T>(n);
                        T* dx = g.raw() + c * n;
                        for (std::size_t i = 0; i < n; ++i) {
                          dx[i] += inv_std[c] * (dy[i] - mean_dy - y[i] * mean_dyy);
                        }
                      }
                    });
}

template <typename T>
Var<T> softmax_channels(const Var<T>& x) {
  const auto& xv = x.value();
  require_rank3(xv, "softmax_channels");
  const std::size_t C = xv.dim(0), n = xv.dim(1) * xv.dim(2);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    T mx = xv[i];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xv[c * n + i]);
    T total = 0;
    for (std::size_t c = 0; c < C; ++c) {
      const T e = std::exp(xv[c * n + i] - mx);
      out[c * n + i] = e;
      total += e;
    }
    for (std::size_t c = 0; c < C; ++c) out[c * n + i] /= total;
  }
  return make_op<T>("softmax_channels", std::move(out), {x}, [C, n](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    const auto& p = self.value;
    for (std::size_t i = 0; i < n; ++i) {
      T dot = 0;
      for (std::size_t c = 0; c < C; ++c) dot += p[c * n + i] * self.grad[c * n + i];
      for (std::size_t c = 0; c < C; ++c) {
        g[c * n + i] += p[c * n + i] * (self.grad[c * n + i] - dot);
      }
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T s = 0;
  for (T v : x.value().data()) s += v;
  return make_op<T>("sum", Tensor<T>({1}, s), {x}, [](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    const T up = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += up;
  });
}

template <typename T>
Var<T> dot(const Var<T>& x, const Tensor<T>& w) {
  if (x.shape() != w.shape()) {
    throw ShapeError("dot: shapes " + to_string(x.shape()) + " and " + to_string(w.shape()) +
                     " differ");
  }
  T s = 0;
  for (std::size_t i = 0; i < w.numel(); ++i) s += x.value()[i] * w[i];
  return make_op<T>("dot", Tensor<T>({1}, s), {x}, [w](Node<T>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    const T up = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += up * w[i];
  });
}

template <typename T>
Var<T> square(const Var<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x.value()[i] * x.value()[i];
  return make_op<T>("square", std::move(out), {x}, [](Node<T>& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += T{2} * in.value[i] * self.grad[i];
  });
}

template <typename T>
Var<T> weighted_sum(std::span<const Var<T>> terms, std::span<const T> coeffs) {
  if (terms.size() != coeffs.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(terms.size()) + " terms but " +
                     std::to_string(coeffs.size()) + " coefficients");
  }
  T total = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) total += coeffs[i] * terms[i].item();
  std::vector<T> c(coeffs.begin(), coeffs.end());
  return make_op<T>("weighted_sum", Tensor<T>({1}, total),
                    std::vector<Var<T>>(terms.begin(), terms.end()),
                    [c = std::move(c)](Node<T>& self) {
                      for (std::size_t i = 0; i < c.size(); ++i) {
                        auto& in = *self.inputs[i];
                        if (in.requires_grad) in.grad_buffer()[0] += c[i] * self.grad[0];
                      }
                    });
}

#define SGSCN_INSTANTIATE(T)                                                       \
  template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, int, int); \
  template Var<T> relu<T>(const Var<T>&);                                           \
  template Var<T> channel_norm<T>(const Var<T>&, T);                                \
  template Var<T> softmax_channels<T>(const Var<T>&);                               \
  template Var<T> sum<T>(const Var<T>&);                                            \
  template Var<T> dot<T>(const Var<T>&, const Tensor<T>&);                          \
  template Var<T> square<T>(const Var<T>&);                                         \
  template Var<T> weighted_sum<T>(std::span<const Var<T>>, std::span<const T>);

SGSCN_INSTANTIATE(float)
SGSCN_INSTANTIATE(double)
#undef SGSCN_INSTANTIATE

}  // namespace sgscn
