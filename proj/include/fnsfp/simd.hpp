#pragma once

#include <cstddef>
#include <string_view>

namespace fnsfp::simd {

enum class Level { Scalar, AVX2, NEON };

// One entry per data-parallel inner loop. Elementwise kernels (axpy,
// history_sum) round identically across levels; reductions do not.
struct KernelTable {
  Level level;
  const char* name;
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*weighted_sumsq)(const double* w, const double* f, std::size_t n);
  // out[k] = sum_{j=1..n} w[j] * hist[(n-j)*len + k]
  void (*history_sum)(const double* w, const double* hist, std::size_t n,
                      std::size_t len, double* out);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();

bool level_supported(Level l);
const KernelTable& table_for(Level l);

// Selected once from CPU features; FNSFP_SIMD=scalar|avx2|neon overrides.
const KernelTable& active();
void force_level(Level l);
void reset_level();

std::string_view level_name(Level l);

inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline double weighted_sumsq(const double* w, const double* f, std::size_t n) {
  return active().weighted_sumsq(w, f, n);
}
inline void history_sum(const double* w, const double* hist, std::size_t n, std::size_t len,
                        double* out) {
  active().history_sum(w, hist, n, len, out);
}

}  // namespace fnsfp::simd
