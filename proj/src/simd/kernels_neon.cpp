#include <arm_neon.h>

#include "fnsfp/simd.hpp"

namespace fnsfp::simd {
namespace {

// vmulq + vaddq rather than vfmaq: keeps the scalar rounding.
void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_sumsq_neon(const double* w, const double* f, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vf = vld1q_f64(f + i);
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(w + i), vmulq_f64(vf, vf)));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += w[i] * (f[i] * f[i]);
  return s;
}

void history_sum_neon(const double* w, const double* hist, std::size_t n, std::size_t len,
                      double* out) {
  std::size_t k0 = 0;
  for (; k0 + 4 <= len; k0 += 4) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    for (std::size_t j = 1; j <= n; ++j) {
      const float64x2_t vw = vdupq_n_f64(w[j]);
      const double* row = hist + (n - j) * len + k0;
      a0 = vaddq_f64(a0, vmulq_f64(vw, vld1q_f64(row)));
      a1 = vaddq_f64(a1, vmulq_f64(vw, vld1q_f64(row + 2)));
    }
    vst1q_f64(out + k0, a0);
    vst1q_f64(out + k0 + 2, a1);
  }
  for (std::size_t k = k0; k < len; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= n; ++j) s += w[j] * hist[(n - j) * len + k];
    out[k] = s;
  }
}

const KernelTable kNeon{Level::NEON, "neon", axpy_neon, dot_neon, weighted_sumsq_neon,
                        history_sum_neon};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace fnsfp::simd
