#include "sgscn/kernels.hpp"

#include <limits>

namespace sgscn::kernels::serial {

template <typename T>
void conv3x3_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output) {
  const std::size_t H = d.height, W = d.width;
  for (std::size_t co = 0; co < d.out_channels; ++co) {
    T* out = output + co * H * W;
    for (std::size_t i = 0; i < H * W; ++i) out[i] = bias ? bias[co] : T{0};
    for (std::size_t ci = 0; ci < d.in_channels; ++ci) {
      const T* in = input + ci * H * W;
      const T* w = weight + (co * d.in_channels + ci) * 9;
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
          T acc = 0;
          for (int ky = 0; ky < 3; ++ky) {
            const long sy = static_cast<long>(y) + ky - 1;
            if (sy < 0 || sy >= static_cast<long>(H)) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const long sx = static_cast<long>(x) + kx - 1;
              if (sx < 0 || sx >= static_cast<long>(W)) continue;
              acc += w[ky * 3 + kx] * in[sy * W + sx];
            }
          }
          out[y * W + x] += acc;
        }
      }
    }
  }
}

template <typename T>
void conv3x3_backward(const ConvDims& d, const T* input, const T* weight, const T* grad_output,
                      T* grad_input, T* grad_weight, T* grad_bias) {
  const std::size_t H = d.height, W = d.width;
  for (std::size_t co = 0; co < d.out_channels; ++co) {
    const T* gout = grad_output + co * H * W;
    if (grad_bias) {
      T s = 0;
      for (std::size_t i = 0; i < H * W; ++i) s += gout[i];
      grad_bias[co] += s;
    }
    for (std::size_t ci = 0; ci < d.in_channels; ++ci) {
      const T* in = input + ci * H * W;
      const T* w = weight + (co * d.in_channels + ci) * 9;
      T* gw = grad_weight ? grad_weight + (co * d.in_channels + ci) * 9 : nullptr;
      T* gin = grad_input ? grad_input + ci * H * W : nullptr;
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
          const T g = gout[y * W + x];
          for (int ky = 0; ky < 3; ++ky) {
            const long sy = static_cast<long>(y) + ky - 1;
            if (sy < 0 || sy >= static_cast<long>(H)) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const long sx = static_cast<long>(x) + kx - 1;
              if (sx < 0 || sx >= static_cast<long>(W)) continue;
              if (gw) gw[ky * 3 + kx] += g * in[sy * W + sx];
              if (gin) gin[sy * W + sx] += g * w[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                     const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * lda + p];
      const T* brow = b + p * ldb;
      T* crow = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void assign_nearest(std::size_t n, std::size_t dim, const T* points, std::size_t k,
                    const T* centroids, std::int32_t* labels, T* sq_dist) {
  for (std::size_t i = 0; i < n; ++i) {
    T best = std::numeric_limits<T>::infinity();
    std::int32_t best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      T s = 0;
      for (std::size_t f = 0; f < dim; ++f) {
        const T diff = points[i * dim + f] - centroids[j * dim + f];
        s += diff * diff;
      }
      if (s < best) {
        best = s;
        best_j = static_cast<std::int32_t>(j);
      }
    }
    labels[i] = best_j;
    sq_dist[i] = best;
  }
}

#define SGSCN_INSTANTIATE(T)                                                                    \
  template void conv3x3_forward<T>(const ConvDims&, const T*, const T*, const T*, T*);         \
  template void conv3x3_backward<T>(const ConvDims&, const T*, const T*, const T*, T*, T*, T*); \
  template void gemm_accumulate<T>(std::size_t, std::size_t, std::size_t, const T*,            \
                                   std::size_t, const T*, std::size_t, T*, std::size_t);        \
  template void assign_nearest<T>(std::size_t, std::size_t, const T*, std::size_t, const T*,   \
                                  std::int32_t*, T*);

SGSCN_INSTANTIATE(float)
SGSCN_INSTANTIATE(double)
#undef SGSCN_INSTANTIATE

}  // namespace sgscn::kernels::serial
