// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define DYAD_AVX2 __attribute__((target("avx2")))

namespace dyad::simd {
namespace {

// c[0..n) += av * b[0..n), multiply then add, 4 lanes at a time.
DYAD_AVX2 inline void axpy_row(double av, const double* b, double* c, std::size_t n) {
  const __m256d va = _mm256_set1_pd(av);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d c0 = _mm256_loadu_pd(c + j);
    __m256d c1 = _mm256_loadu_pd(c + j + 4);
    c0 = _mm256_add_pd(c0, _mm256_mul_pd(va, _mm256_loadu_pd(b + j)));
    c1 = _mm256_add_pd(c1, _mm256_mul_pd(va, _mm256_loadu_pd(b + j + 4)));
    _mm256_storeu_pd(c + j, c0);
    _mm256_storeu_pd(c + j + 4, c1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(c + j);
    c0 = _mm256_add_pd(c0, _mm256_mul_pd(va, _mm256_loadu_pd(b + j)));
    _mm256_storeu_pd(c + j, c0);
  }
  for (; j < n; ++j) c[j] += av * b[j];
}

DYAD_AVX2 void zero(double* c, std::size_t n) {
  const __m256d z = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) _mm256_storeu_pd(c + j, z);
  for (; j < n; ++j) c[j] = 0.0;
}

DYAD_AVX2 void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m,
                            std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    zero(crow, n);
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, crow, n);
  }
}

DYAD_AVX2 void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m,
                            std::size_t k, std::size_t n) {
  zero(c, m * n);
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy_row(arow[i], brow, c + i * n, n);
  }
}

DYAD_AVX2 void accumulate_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

DYAD_AVX2 void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

DYAD_AVX2 void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

DYAD_AVX2 void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

const KernelTable kAvx2{"avx2",   gemm_nn_avx2, gemm_tn_avx2, accumulate_avx2,
                        add_avx2, mul_avx2,     scale_avx2};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

}  // namespace dyad::simd

#else

namespace dyad::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace dyad::simd

#endif
