// SPDX-License-Identifier: Apache-2.0
#include "qlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qlab::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 += a[k] * b[k];
    acc1 += a[k + 1] * b[k + 1];
    acc2 += a[k + 2] * b[k + 2];
    acc3 += a[k + 3] * b[k + 3];
  }
  double s = (acc0 + acc1) + (acc2 + acc3);
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] *= alpha;
}

double pinball_sum_scalar(const double* r, std::size_t n, double tau) {
  const double tm1 = tau - 1.0;
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 += r[k] * (r[k] < 0.0 ? tm1 : tau);
    acc1 += r[k + 1] * (r[k + 1] < 0.0 ? tm1 : tau);
    acc2 += r[k + 2] * (r[k + 2] < 0.0 ? tm1 : tau);
    acc3 += r[k + 3] * (r[k + 3] < 0.0 ? tm1 : tau);
  }
  double s = (acc0 + acc1) + (acc2 + acc3);
  for (; k < n; ++k) s += r[k] * (r[k] < 0.0 ? tm1 : tau);
  return s;
}

double sign_weighted_sum_scalar(const double* r, const double* w,
                                std::size_t n, double tau) {
  const double tm1 = tau - 1.0;
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 += (r[k] < 0.0 ? tm1 : tau) * w[k];
    acc1 += (r[k + 1] < 0.0 ? tm1 : tau) * w[k + 1];
    acc2 += (r[k + 2] < 0.0 ? tm1 : tau) * w[k + 2];
    acc3 += (r[k + 3] < 0.0 ? tm1 : tau) * w[k + 3];
  }
  double s = (acc0 + acc1) + (acc2 + acc3);
  for (; k < n; ++k) s += (r[k] < 0.0 ? tm1 : tau) * w[k];
  return s;
}

const Ops kScalarOps = {
    "scalar",  dot_scalar,          axpy_scalar,
    scale_scalar, pinball_sum_scalar, sign_weighted_sum_scalar,
};

const Ops& resolve() {
  const char* env = std::getenv("QLAB_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return kScalarOps;
#if defined(QLAB_KERNELS_AVX2)
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return avx2_ops();
#endif
    return kScalarOps;
  }
#if defined(QLAB_KERNELS_AVX2)
  if (avx2_supported()) return avx2_ops();
#endif
  return kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active() {
  static const Ops& ops = resolve();
  return ops;
}

std::vector<std::string> compiled_backends() {
  std::vector<std::string> v{"scalar"};
#if defined(QLAB_KERNELS_AVX2)
  v.push_back("avx2");
#endif
  return v;
}

}  // namespace qlab::kern
