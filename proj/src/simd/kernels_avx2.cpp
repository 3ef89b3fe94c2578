// Compiled with -mavx2 only (no FMA) so the elementwise kernels reproduce
// the scalar rounding bit for bit.
#include <immintrin.h>

#include "fnsfp/simd.hpp"

namespace fnsfp::simd {
namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_sumsq_avx2(const double* w, const double* f, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vf = _mm256_loadu_pd(f + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(vf, vf)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (f[i] * f[i]);
  return s;
}

void history_sum_avx2(const double* w, const double* hist, std::size_t n, std::size_t len,
                      double* out) {
  std::size_t k0 = 0;
  // Blocks of 16 outputs stay in registers across the whole history.
  for (; k0 + 16 <= len; k0 += 16) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    for (std::size_t j = 1; j <= n; ++j) {
      const __m256d vw = _mm256_set1_pd(w[j]);
      const double* row = hist + (n - j) * len + k0;
      a0 = _mm256_add_pd(a0, _mm256_mul_pd(vw, _mm256_loadu_pd(row)));
      a1 = _mm256_add_pd(a1, _mm256_mul_pd(vw, _mm256_loadu_pd(row + 4)));
      a2 = _mm256_add_pd(a2, _mm256_mul_pd(vw, _mm256_loadu_pd(row + 8)));
      a3 = _mm256_add_pd(a3, _mm256_mul_pd(vw, _mm256_loadu_pd(row + 12)));
    }
    _mm256_storeu_pd(out + k0, a0);
    _mm256_storeu_pd(out + k0 + 4, a1);
    _mm256_storeu_pd(out + k0 + 8, a2);
    _mm256_storeu_pd(out + k0 + 12, a3);
  }
  for (; k0 + 4 <= len; k0 += 4) {
    __m256d a0 = _mm256_setzero_pd();
    for (std::size_t j = 1; j <= n; ++j)
      a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_set1_pd(w[j]),
                                           _mm256_loadu_pd(hist + (n - j) * len + k0)));
    _mm256_storeu_pd(out + k0, a0);
  }
  for (std::size_t k = k0; k < len; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= n; ++j) s += w[j] * hist[(n - j) * len + k];
    out[k] = s;
  }
}

const KernelTable kAvx2{Level::AVX2, "avx2", axpy_avx2, dot_avx2, weighted_sumsq_avx2,
                        history_sum_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace fnsfp::simd
