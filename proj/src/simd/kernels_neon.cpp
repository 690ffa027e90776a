// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace dyad::simd {
namespace {

// vfmaq_f64 would fuse the multiply-add and change bits, so mul then add.
inline void axpy_row(double av, const double* b, double* c, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(av);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    vst1q_f64(c + j, vaddq_f64(vld1q_f64(c + j), vmulq_f64(va, vld1q_f64(b + j))));
  }
  for (; j < n; ++j) c[j] += av * b[j];
}

void gemm_nn_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, crow, n);
  }
}

void gemm_tn_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) axpy_row(a[p * m + i], b + p * n, c + i * n, n);
  }
}

void accumulate_neon(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_neon(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

const KernelTable kNeon{"neon",   gemm_nn_neon, gemm_tn_neon, accumulate_neon,
                        add_neon, mul_neon,     scale_neon};

}  // namespace

const KernelTable* neon_kernels() { return &kNeon; }

}  // namespace dyad::simd

#else

namespace dyad::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace dyad::simd

#endif
