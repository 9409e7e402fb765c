#include "diffdist/gemm.hpp"

#include "diffdist/parallel.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#define DIFFDIST_GEMM_AVX512 1
#elif defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define DIFFDIST_GEMM_AVX2 1
#endif

namespace diffdist::detail {

namespace {

// Scalar reference: k ascending, one element at a time.
template <class Real>
void gemm_rows_scalar(const Real* A, const Real* B, Real* C, std::size_t row_begin,
                      std::size_t row_end, std::size_t k, std::size_t n) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const Real* __restrict a = A + i * k;
    Real* __restrict c = C + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const Real ap = a[p];
      const Real* __restrict b = B + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += ap * b[j];
    }
  }
}

#if defined(DIFFDIST_GEMM_AVX512)

// 4 rows x 64 columns of C held in registers across the k panel.
inline void mk_4x64_f32(const float* const* a, const float* B, std::size_t kc, std::size_t n,
                        float* const* c) {
  __m512 acc[4][4];
  for (int r = 0; r < 4; ++r)
    for (int q = 0; q < 4; ++q) acc[r][q] = _mm512_loadu_ps(c[r] + 16 * q);
  for (std::size_t p = 0; p < kc; ++p) {
    const float* b = B + p * n;
    const __m512 b0 = _mm512_loadu_ps(b);
    const __m512 b1 = _mm512_loadu_ps(b + 16);
    const __m512 b2 = _mm512_loadu_ps(b + 32);
    const __m512 b3 = _mm512_loadu_ps(b + 48);
    for (int r = 0; r < 4; ++r) {
      const __m512 av = _mm512_set1_ps(a[r][p]);
      acc[r][0] = _mm512_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_ps(av, b1, acc[r][1]);
      acc[r][2] = _mm512_fmadd_ps(av, b2, acc[r][2]);
      acc[r][3] = _mm512_fmadd_ps(av, b3, acc[r][3]);
    }
  }
  for (int r = 0; r < 4; ++r)
    for (int q = 0; q < 4; ++q) _mm512_storeu_ps(c[r] + 16 * q, acc[r][q]);
}

// Masked tail: 1 row, up to 16 columns.
inline void mk_1xM_f32(const float* a, const float* B, std::size_t kc, std::size_t n, float* c,
                       unsigned width) {
  const __mmask16 mask = static_cast<__mmask16>((1u << width) - 1);
  __m512 acc = _mm512_maskz_loadu_ps(mask, c);
  for (std::size_t p = 0; p < kc; ++p) {
    const __m512 bv = _mm512_maskz_loadu_ps(mask, B + p * n);
    acc = _mm512_fmadd_ps(_mm512_set1_ps(a[p]), bv, acc);
  }
  _mm512_mask_storeu_ps(c, mask, acc);
}

void gemm_rows_f32(const float* A, const float* B, float* C, std::size_t row_begin,
                   std::size_t row_end, std::size_t k, std::size_t n) {
  constexpr std::size_t kKC = 512;  // B panel of 512x64 floats stays L2-resident
  for (std::size_t pk = 0; pk < k; pk += kKC) {
    const std::size_t kc = (k - pk < kKC) ? k - pk : kKC;
    std::size_t j = 0;
    for (; j + 64 <= n; j += 64) {
      const float* Bp = B + pk * n + j;
      std::size_t i = row_begin;
      for (; i + 4 <= row_end; i += 4) {
        const float* a[4] = {A + i * k + pk, A + (i + 1) * k + pk, A + (i + 2) * k + pk,
                             A + (i + 3) * k + pk};
        float* c[4] = {C + i * n + j, C + (i + 1) * n + j, C + (i + 2) * n + j,
                       C + (i + 3) * n + j};
        mk_4x64_f32(a, Bp, kc, n, c);
      }
      for (; i < row_end; ++i) {
        const float* a = A + i * k + pk;
        float* c = C + i * n + j;
        for (unsigned q = 0; q < 4; ++q) mk_1xM_f32(a, Bp + 16 * q, kc, n, c + 16 * q, 16);
      }
    }
    for (; j + 16 <= n; j += 16)
      for (std::size_t i = row_begin; i < row_end; ++i)
        mk_1xM_f32(A + i * k + pk, B + pk * n + j, kc, n, C + i * n + j, 16);
    if (j < n)
      for (std::size_t i = row_begin; i < row_end; ++i)
        mk_1xM_f32(A + i * k + pk, B + pk * n + j, kc, n, C + i * n + j,
                   static_cast<unsigned>(n - j));
  }
}

#elif defined(DIFFDIST_GEMM_AVX2)

// 4 rows x 32 columns (4x4 ymm accumulators).
inline void mk_4x32_f32(const float* const* a, const float* B, std::size_t kc, std::size_t n,
                        float* const* c) {
  __m256 acc[4][4];
  for (int r = 0; r < 4; ++r)
    for (int q = 0; q < 4; ++q) acc[r][q] = _mm256_loadu_ps(c[r] + 8 * q);
  for (std::size_t p = 0; p < kc; ++p) {
    const float* b = B + p * n;
    const __m256 b0 = _mm256_loadu_ps(b);
    const __m256 b1 = _mm256_loadu_ps(b + 8);
    const __m256 b2 = _mm256_loadu_ps(b + 16);
    const __m256 b3 = _mm256_loadu_ps(b + 24);
    for (int r = 0; r < 4; ++r) {
      const __m256 av = _mm256_set1_ps(a[r][p]);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
      acc[r][2] = _mm256_fmadd_ps(av, b2, acc[r][2]);
      acc[r][3] = _mm256_fmadd_ps(av, b3, acc[r][3]);
    }
  }
  for (int r = 0; r < 4; ++r)
    for (int q = 0; q < 4; ++q) _mm256_storeu_ps(c[r] + 8 * q, acc[r][q]);
}

void gemm_rows_f32(const float* A, const float* B, float* C, std::size_t row_begin,
                   std::size_t row_end, std::size_t k, std::size_t n) {
  constexpr std::size_t kKC = 512;
  for (std::size_t pk = 0; pk < k; pk += kKC) {
    const std::size_t kc = (k - pk < kKC) ? k - pk : kKC;
    std::size_t j = 0;
    for (; j + 32 <= n; j += 32) {
      const float* Bp = B + pk * n + j;
      std::size_t i = row_begin;
      for (; i + 4 <= row_end; i += 4) {
        const float* a[4] = {A + i * k + pk, A + (i + 1) * k + pk, A + (i + 2) * k + pk,
                             A + (i + 3) * k + pk};
        float* c[4] = {C + i * n + j, C + (i + 1) * n + j, C + (i + 2) * n + j,
                       C + (i + 3) * n + j};
        mk_4x32_f32(a, Bp, kc, n, c);
      }
      for (; i < row_end; ++i) {
        const float* __restrict a = A + i * k + pk;
        float* __restrict c = C + i * n + j;
        for (std::size_t p = 0; p < kc; ++p) {
          const float ap = a[p];
          const float* __restrict b = Bp + p * n;
          for (std::size_t q = 0; q < 32; ++q) c[q] += ap * b[q];
        }
      }
    }
    if (j < n) {
      for (std::size_t i = row_begin; i < row_end; ++i) {
        const float* __restrict a = A + i * k + pk;
        float* __restrict c = C + i * n;
        for (std::size_t p = 0; p < kc; ++p) {
          const float ap = a[p];
          const float* __restrict b = B + (pk + p) * n;
          for (std::size_t q = j; q < n; ++q) c[q] += ap * b[q];
        }
      }
    }
  }
}

#else

void gemm_rows_f32(const float* A, const float* B, float* C, std::size_t row_begin,
                   std::size_t row_end, std::size_t k, std::size_t n) {
  gemm_rows_scalar(A, B, C, row_begin, row_end, k, n);
}

#endif

}  // namespace

void gemm_f32(const float* A, const float* B, float* C, std::size_t m, std::size_t k,
              std::size_t n) {
  // Parallelize across row blocks only when the work is worth a dispatch.
  if (m * k * n >= (1u << 21) && m >= 8) {
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
      gemm_rows_f32(A, B, C, begin, end, k, n);
    });
  } else {
    gemm_rows_f32(A, B, C, 0, m, k, n);
  }
}

void gemm_f64(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
              std::size_t n) {
  gemm_rows_scalar(A, B, C, 0, m, k, n);
}

namespace {

template <class Real>
void transpose_tiled(const Real* in, Real* out, std::size_t rows, std::size_t cols) {
  constexpr std::size_t kTile = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += kTile) {
    const std::size_t i1 = i0 + kTile < rows ? i0 + kTile : rows;
    for (std::size_t j0 = 0; j0 < cols; j0 += kTile) {
      const std::size_t j1 = j0 + kTile < cols ? j0 + kTile : cols;
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = in[i * cols + j];
    }
  }
}

}  // namespace

void transpose_f32(const float* in, float* out, std::size_t rows, std::size_t cols) {
  transpose_tiled(in, out, rows, cols);
}

void transpose_f64(const double* in, double* out, std::size_t rows, std::size_t cols) {
  transpose_tiled(in, out, rows, cols);
}

}  // namespace diffdist::detail
