// Row-major matrix kernels used by the MLP.
//
// All variants accumulate C[i][j] over k in ascending order with a fixed
// grouping, so results are identical for any worker count. The float path
// uses an AVX-512 (or AVX2+FMA) register-blocked micro-kernel when the build
// target supports it; the double path is a plain loop used at oracle/test sizes.
#pragma once

#include <cstddef>

namespace diffdist::detail {

// C[m x n] += A[m x k] * B[k x n]
void gemm_f32(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
              std::size_t n);
void gemm_f64(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
              std::size_t n);

void transpose_f32(const float* in, float* out, std::size_t rows, std::size_t cols);
void transpose_f64(const double* in, double* out, std::size_t rows, std::size_t cols);

template <class Real>
inline void gemm(const Real* A, const Real* B, Real* C, std::size_t m, std::size_t k,
                 std::size_t n) {
  if constexpr (sizeof(Real) == 4)
    gemm_f32(A, B, C, m, k, n);
  else
    gemm_f64(A, B, C, m, k, n);
}

template <class Real>
inline void transpose(const Real* in, Real* out, std::size_t rows, std::size_t cols) {
  if constexpr (sizeof(Real) == 4)
    transpose_f32(in, out, rows, cols);
  else
    transpose_f64(in, out, rows, cols);
}

}  // namespace diffdist::detail
