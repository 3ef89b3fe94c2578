#include "fnsfp/simd.hpp"

namespace fnsfp::simd {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_sumsq_scalar(const double* w, const double* f, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * (f[i] * f[i]);
  return s;
}

void history_sum_scalar(const double* w, const double* hist, std::size_t n, std::size_t len,
                        double* out) {
  for (std::size_t k = 0; k < len; ++k) out[k] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double a = w[j];
    const double* row = hist + (n - j) * len;
    for (std::size_t k = 0; k < len; ++k) out[k] += a * row[k];
  }
}

const KernelTable kScalar{Level::Scalar, "scalar", axpy_scalar, dot_scalar,
                          weighted_sumsq_scalar, history_sum_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace fnsfp::simd
