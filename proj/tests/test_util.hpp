#pragma once

#include <random>

#include "sgscn/autodiff.hpp"
#include "sgscn/grid.hpp"

namespace testutil {

using sgscn::Shape;
using sgscn::Tensor;
using sgscn::Var;

inline Tensor<double> randn(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

inline Tensor<double> randu(Shape shape, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

inline Var<double> leaf(const Tensor<double>& t, bool grad = false) {
  return Var<double>::leaf(t, grad);
}

// Naive 6-loop 3x3 convolution, stride 1, zero padding 1.
inline Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w,
                                 const Tensor<double>& b) {
  const long Ci = static_cast<long>(x.dim(0)), H = static_cast<long>(x.dim(1)),
             W = static_cast<long>(x.dim(2)), Co = static_cast<long>(w.dim(0));
  Tensor<double> out({w.dim(0), x.dim(1), x.dim(2)});
  for (long o = 0; o < Co; ++o)
    for (long r = 0; r < H; ++r)
      for (long c = 0; c < W; ++c) {
        double s = b[o];
        for (long i = 0; i < Ci; ++i)
          for (long dr = -1; dr <= 1; ++dr)
            for (long dc = -1; dc <= 1; ++dc) {
              const long rr = r + dr, cc = c + dc;
              if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
              s += w[((o * Ci + i) * 3 + dr + 1) * 3 + dc + 1] * x[(i * H + rr) * W + cc];
            }
        out[(o * H + r) * W + c] = s;
      }
  return out;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
