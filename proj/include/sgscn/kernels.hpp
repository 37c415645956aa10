#pragma once

// Hot loops of the engine, each in two flavours:
//   serial::  straightforward loops, kept as the reference the tests and the
//             benchmark compare against;
//   omp::     im2col + blocked GEMM (convolution) or row-parallel sweeps,
//             parallelised with OpenMP.
// Every omp:: kernel writes each output element from exactly one thread in a
// fixed summation order, so results do not depend on the thread count.
//
// Layouts are row-major: images [C,H,W], conv weights [Co,Ci,3,3].
// Backward kernels ACCUMULATE into their gradient outputs.

#include <cstddef>
#include <cstdint>

namespace sgscn::kernels {

struct ConvDims {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;

  std::size_t plane() const noexcept { return height * width; }
  std::size_t patch() const noexcept { return in_channels * 9; }
};

namespace serial {

template <typename T>
void conv3x3_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output);

/// Any of grad_input / grad_weight / grad_bias may be null to skip it.
template <typename T>
void conv3x3_backward(const ConvDims& d, const T* input, const T* weight, const T* grad_output,
                      T* grad_input, T* grad_weight, T* grad_bias);

/// C[m,n] += A[m,k] * B[k,n] with leading dimensions lda/ldb/ldc.
template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                     const T* b, std::size_t ldb, T* c, std::size_t ldc);

/// Nearest-centroid assignment. points [n,dim], centroids [k,dim].
/// Writes labels and squared distances; ties go to the lower centroid index.
template <typename T>
void assign_nearest(std::size_t n, std::size_t dim, const T* points, std::size_t k,
                    const T* centroids, std::int32_t* labels, T* sq_dist);

}  // namespace serial

namespace omp {

template <typename T>
void conv3x3_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output);

template <typename T>
void conv3x3_backward(const ConvDims& d, const T* input, const T* weight, const T* grad_output,
                      T* grad_input, T* grad_weight, T* grad_bias);

template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                     const T* b, std::size_t ldb, T* c, std::size_t ldc);

template <typename T>
void assign_nearest(std::size_t n, std::size_t dim, const T* points, std::size_t k,
                    const T* centroids, std::int32_t* labels, T* sq_dist);

}  // namespace omp

}  // namespace sgscn::kernels
