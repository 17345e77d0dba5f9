// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qlab::kern {

// Vectorizable inner loops used by the solvers and the trainer.
//
// Every backend honors the same reduction contract: sums are accumulated
// in four independent lanes (lane l takes elements 4k+l), the lanes are
// combined as (acc0 + acc1) + (acc2 + acc3), and any tail elements are
// then added one at a time in index order. No fused multiply-add in any
// backend. Identical inputs therefore produce bit-identical results no
// matter which backend runs, which keeps seeded training traces stable
// across machines.
struct Ops {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x[i] *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  // sum_i r[i] * (tau - [r[i] < 0])
  double (*pinball_sum)(const double* r, std::size_t n, double tau);
  // sum_i (tau - [r[i] < 0]) * w[i]
  double (*sign_weighted_sum)(const double* r, const double* w, std::size_t n,
                              double tau);
};

const Ops& scalar_ops();

#if defined(QLAB_KERNELS_AVX2)
const Ops& avx2_ops();
bool avx2_supported();
#endif

// Backend selection, resolved once per process. The QLAB_KERNELS
// environment variable ("scalar", "avx2") forces a backend; an
// unavailable or unknown value falls back to scalar. Without the
// variable the fastest supported backend wins.
const Ops& active();

// Names of the backends compiled into this binary.
std::vector<std::string> compiled_backends();

}  // namespace qlab::kern
