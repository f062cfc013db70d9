#include "sepcov/kernels.hpp"

namespace sepcov::kernels {
namespace {

// Four independent accumulators, combined pairwise at the end. Same shape as
// the vector variants but without relying on the compiler to vectorize.
double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_diff_scalar(const double* a, const double* b, const double* c,
                       const double* d, std::size_t n) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    s0 += a[i] * b[i] - c[i] * d[i];
    s1 += a[i + 1] * b[i + 1] - c[i + 1] * d[i + 1];
  }
  for (; i < n; ++i) s0 += a[i] * b[i] - c[i] * d[i];
  return s0 + s1;
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

}  // namespace

namespace detail {
const KernelTable scalar_table{dot_scalar, axpy_scalar, dot_diff_scalar,
                               sub_scalar};
}

}  // namespace sepcov::kernels
