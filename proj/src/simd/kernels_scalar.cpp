// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <cstring>
#include <string_view>

#include "dyad/simd/kernels.hpp"

namespace dyad::simd {
namespace {

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void accumulate_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

const KernelTable kScalar{"scalar",          gemm_nn_scalar, gemm_tn_scalar, accumulate_scalar,
                          add_scalar,        mul_scalar,     scale_scalar};

const KernelTable* g_active = nullptr;

const KernelTable* pick_default() {
  if (const char* env = std::getenv("DYAD_SIMD")) {
    for (const KernelTable* t : available_kernels()) {
      if (std::string_view(env) == t->name) return t;
    }
  }
  return available_kernels().back();
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

bool cpu_supports(const KernelTable& table) {
  const std::string_view name = table.name;
  if (name == "scalar") return true;
#if defined(__x86_64__) || defined(__i386__)
  if (name == "avx2") return __builtin_cpu_supports("avx2");
#endif
#if defined(__aarch64__)
  if (name == "neon") return true;
#endif
  return false;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&kScalar};
  for (const KernelTable* t : {neon_kernels(), avx2_kernels()}) {
    if (t != nullptr && cpu_supports(*t)) out.push_back(t);
  }
  return out;
}

const KernelTable& active() {
  if (g_active == nullptr) g_active = pick_default();
  return *g_active;
}

bool select(std::string_view name) {
  for (const KernelTable* t : available_kernels()) {
    if (name == t->name) {
      g_active = t;
      return true;
    }
  }
  return false;
}

}  // namespace dyad::simd
