#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "fnsfp/simd.hpp"

using namespace fnsfp::simd;

namespace {

std::vector<double> randv(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> N;
  std::vector<double> v(n);
  for (auto& x : v) x = N(g);
  return v;
}

std::vector<Level> levels() {
  std::vector<Level> out{Level::Scalar};
  for (Level l : {Level::AVX2, Level::NEON})
    if (level_supported(l)) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("every compiled SIMD level matches the scalar kernels") {
  const KernelTable& ref = scalar_table();
  for (Level l : levels()) {
    const KernelTable& t = table_for(l);
    CAPTURE(level_name(l));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u}) {
      CAPTURE(n);
      const auto x = randv(n, 1), y0 = randv(n, 2), w = randv(n, 3);
      auto y1 = y0, y2 = y0;
      ref.axpy(0.37, x.data(), y1.data(), n);
      t.axpy(0.37, x.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      const double d1 = ref.dot(x.data(), w.data(), n), d2 = t.dot(x.data(), w.data(), n);
      CHECK(std::abs(d1 - d2) <= 1e-13 * (1.0 + std::abs(d1)) * (1.0 + static_cast<double>(n)));
      const double s1 = ref.weighted_sumsq(w.data(), x.data(), n);
      const double s2 = t.weighted_sumsq(w.data(), x.data(), n);
      CHECK(std::abs(s1 - s2) <= 1e-13 * (1.0 + std::abs(s1)) * (1.0 + static_cast<double>(n)));
    }
    // history sum is elementwise: bitwise equal
    for (std::size_t levels_n : {1u, 2u, 9u}) {
      for (std::size_t len : {1u, 5u, 8u, 195u}) {
        const auto wts = randv(levels_n + 1, 4);
        const auto hist = randv(levels_n * len, 5);
        std::vector<double> o1(len), o2(len);
        ref.history_sum(wts.data(), hist.data(), levels_n, len, o1.data());
        t.history_sum(wts.data(), hist.data(), levels_n, len, o2.data());
        CHECK(std::memcmp(o1.data(), o2.data(), len * sizeof(double)) == 0);
      }
    }
  }
}

TEST_CASE("history_sum follows its indexing contract") {
  // out[k] = sum_{j=1..n} w[j] hist[(n-j) len + k]
  const std::vector<double> w{9.0, 2.0, 3.0};
  const std::vector<double> hist{1.0, 10.0, 100.0, 1000.0};  // 2 levels, len 2
  std::vector<double> out(2);
  scalar_table().history_sum(w.data(), hist.data(), 2, 2, out.data());
  CHECK(out[0] == 2.0 * 100.0 + 3.0 * 1.0);
  CHECK(out[1] == 2.0 * 1000.0 + 3.0 * 10.0);
}

TEST_CASE("forcing a level changes the active table") {
  force_level(Level::Scalar);
  CHECK(active().level == Level::Scalar);
  reset_level();
  CHECK(level_supported(active().level));
}
