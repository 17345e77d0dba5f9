// SPDX-License-Identifier: Apache-2.0
// AVX2 backend. Compiled with -mavx2 in its own translation unit; only
// reached after a runtime cpuid check. Lane layout and combination order
// match the scalar backend exactly (see kernels.hpp), so results are
// bit-identical to scalar.
#include "qlab/kernels.hpp"

#if defined(QLAB_KERNELS_AVX2)

#include <immintrin.h>

namespace qlab::kern {

namespace {

inline double reduce_lanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d va = _mm256_loadu_pd(a + k);
    __m256d vb = _mm256_loadu_pd(b + k);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double s = reduce_lanes(acc);
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d vx = _mm256_loadu_pd(x + k);
    __m256d vy = _mm256_loadu_pd(y + k);
    _mm256_storeu_pd(y + k, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(x + k, _mm256_mul_pd(va, _mm256_loadu_pd(x + k)));
  }
  for (; k < n; ++k) x[k] *= alpha;
}

double pinball_sum_avx2(const double* r, std::size_t n, double tau) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vtm1 = _mm256_set1_pd(tau - 1.0);
  const __m256d vzero = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d vr = _mm256_loadu_pd(r + k);
    __m256d neg = _mm256_cmp_pd(vr, vzero, _CMP_LT_OQ);
    __m256d coef = _mm256_blendv_pd(vtau, vtm1, neg);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vr, coef));
  }
  double s = reduce_lanes(acc);
  const double tm1 = tau - 1.0;
  for (; k < n; ++k) s += r[k] * (r[k] < 0.0 ? tm1 : tau);
  return s;
}

double sign_weighted_sum_avx2(const double* r, const double* w, std::size_t n,
                              double tau) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vtm1 = _mm256_set1_pd(tau - 1.0);
  const __m256d vzero = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d vr = _mm256_loadu_pd(r + k);
    __m256d vw = _mm256_loadu_pd(w + k);
    __m256d neg = _mm256_cmp_pd(vr, vzero, _CMP_LT_OQ);
    __m256d coef = _mm256_blendv_pd(vtau, vtm1, neg);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(coef, vw));
  }
  double s = reduce_lanes(acc);
  const double tm1 = tau - 1.0;
  for (; k < n; ++k) s += (r[k] < 0.0 ? tm1 : tau) * w[k];
  return s;
}

const Ops kAvx2Ops = {
    "avx2",  dot_avx2,          axpy_avx2,
    scale_avx2, pinball_sum_avx2, sign_weighted_sum_avx2,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace qlab::kern

#endif  // QLAB_KERNELS_AVX2
