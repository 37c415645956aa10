#include "sgscn/kernels.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace sgscn::kernels::omp {
namespace {

// Register tile: MR rows of C by NR columns; NR spans 256 bytes of T.
constexpr std::size_t kMR = 4;
template <typename T>
constexpr std::size_t kNR = 256 / sizeof(T);
constexpr std::size_t kKC = 256;

template <typename T>
inline void micro_tile(std::size_t kc, const T* a, std::size_t lda, const T* b, std::size_t ldb,
                       T* c, std::size_t ldc) {
  constexpr std::size_t NR = kNR<T>;
  T acc[kMR][NR] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const T* brow = b + p * ldb;
    for (std::size_t r = 0; r < kMR; ++r) {
      const T av = a[r * lda + p];
#pragma omp simd
      for (std::size_t j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < kMR; ++r) {
#pragma omp simd
    for (std::size_t j = 0; j < NR; ++j) c[r * ldc + j] += acc[r][j];
  }
}

template <typename T>
inline void edge_tile(std::size_t mr, std::size_t nr, std::size_t kc, const T* a, std::size_t lda,
                      const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t r = 0; r < mr; ++r) {
    for (std::size_t p = 0; p < kc; ++p) {
      const T av = a[r * lda + p];
      const T* brow = b + p * ldb;
      for (std::size_t j = 0; j < nr; ++j) c[r * ldc + j] += av * brow[j];
    }
  }
}

// Patch matrix [Ci*9, H*W]; row (ci*9 + ky*3 + kx) holds the input shifted by
// (ky-1, kx-1) with zero fill.
template <typename T>
void im2col(const ConvDims& d, const T* input, T* cols) {
  const long H = static_cast<long>(d.height), W = static_cast<long>(d.width);
  const long rows = static_cast<long>(d.patch());
#pragma omp parallel for schedule(static)
  for (long row = 0; row < rows; ++row) {
    const long ci = row / 9, tap = row % 9;
    const long dy = tap / 3 - 1, dx = tap % 3 - 1;
    const T* in = input + ci * H * W;
    T* dst = cols + row * H * W;
    for (long y = 0; y < H; ++y) {
      const long sy = y + dy;
      T* drow = dst + y * W;
      if (sy < 0 || sy >= H) {
        std::fill(drow, drow + W, T{0});
        continue;
      }
      const T* srow = in + sy * W;
      for (long x = 0; x < W; ++x) {
        const long sx = x + dx;
        drow[x] = (sx >= 0 && sx < W) ? srow[sx] : T{0};
      }
    }
  }
}

// Transposed patch matrix [H*W, Ci*9].
template <typename T>
void im2row(const ConvDims& d, const T* input, T* rows_out) {
  const long H = static_cast<long>(d.height), W = static_cast<long>(d.width);
  const long K = static_cast<long>(d.patch());
#pragma omp parallel for schedule(static)
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      T* dst = rows_out + (y * W + x) * K;
      for (long ci = 0; ci < static_cast<long>(d.in_channels); ++ci) {
        const T* in = input + ci * H * W;
        for (long tap = 0; tap < 9; ++tap) {
          const long sy = y + tap / 3 - 1, sx = x + tap % 3 - 1;
          dst[ci * 9 + tap] = (sy >= 0 && sy < H && sx >= 0 && sx < W) ? in[sy * W + sx] : T{0};
        }
      }
    }
  }
}

// Scatter-add of a patch matrix back onto the image grid. Parallel over input
// channels; each channel's nine taps are summed in a fixed order.
template <typename T>
void col2im_accumulate(const ConvDims& d, const T* cols, T* grad_input) {
  const long H = static_cast<long>(d.height), W = static_cast<long>(d.width);
#pragma omp parallel for schedule(static)
  for (long ci = 0; ci < static_cast<long>(d.in_channels); ++ci) {
    T* gin = grad_input + ci * H * W;
    for (long tap = 0; tap < 9; ++tap) {
      const long dy = tap / 3 - 1, dx = tap % 3 - 1;
      const T* src = cols + (ci * 9 + tap) * H * W;
      for (long y = 0; y < H; ++y) {
        const long sy = y + dy;
        if (sy < 0 || sy >= H) continue;
        const long x0 = std::max(0L, -dx), x1 = std::min(W, W - dx);
        T* grow = gin + sy * W;
        const T* srow = src + y * W;
        for (long x = x0; x < x1; ++x) grow[x + dx] += srow[x];
      }
    }
  }
}

template <typename T>
std::vector<T>& scratch(int slot) {
  thread_local std::vector<T> buffers[3];
  return buffers[slot];
}

}  // namespace

template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                     const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t NR = kNR<T>;
  const long col_blocks = static_cast<long>((n + NR - 1) / NR);
  // Column panels are independent; within a panel the k-blocks are visited in
  // ascending order, so every C element sees the same summation sequence.
#pragma omp parallel for schedule(static)
  for (long jb = 0; jb < col_blocks; ++jb) {
    const std::size_t j0 = static_cast<std::size_t>(jb) * NR;
    const std::size_t nr = std::min(NR, n - j0);
    for (std::size_t p0 = 0; p0 < k; p0 += kKC) {
      const std::size_t kc = std::min(kKC, k - p0);
      for (std::size_t i0 = 0; i0 < m; i0 += kMR) {
        const std::size_t mr = std::min(kMR, m - i0);
        const T* ap = a + i0 * lda + p0;
        const T* bp = b + p0 * ldb + j0;
        T* cp = c + i0 * ldc + j0;
        if (mr == kMR && nr == NR) {
          micro_tile(kc, ap, lda, bp, ldb, cp, ldc);
        } else {
          edge_tile(mr, nr, kc, ap, lda, bp, ldb, cp, ldc);
        }
      }
    }
  }
}

template <typename T>
void conv3x3_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output) {
  const std::size_t hw = d.plane(), K = d.patch();
  auto& cols = scratch<T>(0);
  cols.resize(K * hw);
  im2col(d, input, cols.data());
  for (std::size_t co = 0; co < d.out_channels; ++co) {
    std::fill(output + co * hw, output + (co + 1) * hw, bias ? bias[co] : T{0});
  }
  gemm_accumulate(d.out_channels, hw, K, weight, K, cols.data(), hw, output, hw);
}

template <typename T>
void conv3x3_backward(const ConvDims& d, const T* input, const T* weight, const T* grad_output,
                      T* grad_input, T* grad_weight, T* grad_bias) {
  const std::size_t hw = d.plane(), K = d.patch(), Co = d.out_channels;
  if (grad_bias) {
#pragma omp parallel for schedule(static)
    for (long co = 0; co < static_cast<long>(Co); ++co) {
      const T* g = grad_output + co * hw;
      T s = 0;
      for (std::size_t i = 0; i < hw; ++i) s += g[i];
      grad_bias[co] += s;
    }
  }
  if (grad_weight) {
    // dW[Co,K] += dOut[Co,HW] * rows[HW,K]
    auto& rows = scratch<T>(1);
    rows.resize(hw * K);
    im2row(d, input, rows.data());
    gemm_accumulate(Co, K, hw, grad_output, hw, rows.data(), K, grad_weight, K);
  }
  if (grad_input) {
    // dCols[K,HW] = W^T[K,Co] * dOut[Co,HW], then scatter back.
    auto& wt = scratch<T>(2);
    wt.resize(K * Co);
    for (std::size_t co = 0; co < Co; ++co) {
      for (std::size_t p = 0; p < K; ++p) wt[p * Co + co] = weight[co * K + p];
    }
    auto& dcols = scratch<T>(0);
    dcols.assign(K * hw, T{0});
    gemm_accumulate(K, hw, Co, wt.data(), Co, grad_output, hw, dcols.data(), hw);
    col2im_accumulate(d, dcols.data(), grad_input);
  }
}

template <typename T>
void assign_nearest(std::size_t n, std::size_t dim, const T* points, std::size_t k,
                    const T* centroids, std::int32_t* labels, T* sq_dist) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    T best = std::numeric_limits<T>::infinity();
    std::int32_t best_j = 0;
    const T* pt = points + i * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const T* cj = centroids + j * dim;
      T s = 0;
      for (std::size_t f = 0; f < dim; ++f) {
        const T diff = pt[f] - cj[f];
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

}  // namespace sgscn::kernels::omp
