// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense double-precision inner loops used by the autodiff substrate.
//
// Every backend must produce results bit-identical to the scalar reference.
// The reference fixes the summation order: for gemm, each output element is
// accumulated over k in ascending order starting from +0.0, one multiply and
// one add per step (no fused multiply-add). SIMD variants vectorize across the
// output column index only, which keeps that order intact.

#include <cstddef>
#include <string_view>
#include <vector>

namespace dyad::simd {

struct KernelTable {
  const char* name;
  /// C[m,n] = A[m,k] * B[k,n]   (all row-major, C overwritten)
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  /// C[m,n] = A[k,m]^T * B[k,n]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  /// y[i] += x[i]
  void (*accumulate)(const double* x, double* y, std::size_t n);
  /// out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Null when the build target has no AVX2 code path.
const KernelTable* avx2_kernels();

/// Null when the build target has no NEON code path.
const KernelTable* neon_kernels();

/// True when the running CPU can execute the given table.
bool cpu_supports(const KernelTable& table);

/// Tables that are both compiled in and runnable on this CPU, scalar first.
std::vector<const KernelTable*> available_kernels();

/// The table all tensor ops dispatch through. Chosen once on first use: the
/// widest available backend, unless DYAD_SIMD=scalar|avx2|neon overrides it.
const KernelTable& active();

/// Force a backend by name; returns false (and changes nothing) when the
/// backend is unavailable.
bool select(std::string_view name);

}  // namespace dyad::simd
