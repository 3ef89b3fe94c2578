#include <doctest.h>

#include <cmath>
#include <random>

#include "fnsfp/fene_model.hpp"

using namespace fnsfp;

namespace {
SpringModel fene(double b) {
  SpringModel s;
  s.kind = SpringKind::FENE;
  s.b = b;
  return s;
}
SpringModel hook() {
  SpringModel s;
  s.kind = SpringKind::Hookean;
  return s;
}
Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd q(2);
  q << a, b;
  return q;
}
}  // namespace

TEST_CASE("potential examples and domain") {
  CHECK(potential(hook(), 1.7) == 1.7);
  CHECK(potential(hook(), 0.0) == 0.0);
  CHECK(potential(fene(10), 0.0) == 0.0);
  CHECK(potential(fene(10), 1.0) == doctest::Approx(-5.0 * std::log(0.8)).epsilon(1e-15));
  CHECK(potential(fene(10), 1.0) == doctest::Approx(1.1157178).epsilon(1e-7));
  // series -b/2 ln(1 - 2s/b) = sum (2s/b)^k b/(2k)
  double ser = 0.0;
  for (int k = 1; k < 200; ++k) ser += std::pow(0.2, k) * 5.0 / k;
  CHECK(potential(fene(10), 1.0) == doctest::Approx(ser).epsilon(1e-14));
  CHECK_THROWS_AS(potential(fene(10), 5.0), std::domain_error);
  CHECK_THROWS_AS(potential(hook(), -1.0), std::domain_error);
}

TEST_CASE("spring force examples") {
  CHECK(spring_force(hook(), v2(0, 0)).norm() == 0.0);
  CHECK(spring_force(fene(10), v2(0, 0)).norm() == 0.0);
  CHECK(spring_force(hook(), v2(1, 2)).isApprox(v2(1, 2)));
  const auto F = spring_force(fene(4), v2(1, 0));
  CHECK(F(0) == doctest::Approx(4.0 / 3.0));
  CHECK(F(1) == 0.0);
  CHECK_THROWS_AS(spring_force(fene(4), v2(2, 0)), std::domain_error);
}

TEST_CASE("force is the gradient of U(|q|^2/2); FENE tends to Hookean") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> U(-1.4, 1.4);
  const double h = 1e-6;
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd q = v2(U(g), U(g));
    for (const auto& s : {hook(), fene(10), fene(6)}) {
      const Eigen::VectorXd F = spring_force(s, q);
      for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
        e(k) = h;
        const double fd = (potential(s, 0.5 * (q + e).squaredNorm()) - potential(s, 0.5 * (q - e).squaredNorm())) / (2 * h);
        CHECK(std::abs(fd - F(k)) < 1e-6);
        // M grad(1/M) = U' q
        const double iM = (1.0 / maxwellian_unnormalized(s, q + e) - 1.0 / maxwellian_unnormalized(s, q - e)) / (2 * h);
        CHECK(std::abs(maxwellian_unnormalized(s, q) * iM - F(k)) < 1e-5);
      }
      CHECK(spring_force(s, -q).isApprox(-F));
    }
    double prev = INFINITY;
    for (double b : {10.0, 100.0, 1000.0}) {
      const double e = (spring_force(fene(b), q) - spring_force(hook(), q)).norm();
      CHECK(e < prev);
      CHECK(e * b < 10.0 * q.squaredNorm() * q.norm());
      prev = e;
    }
  }
}

TEST_CASE("Maxwellian values, ratios and normalization") {
  CHECK(maxwellian_unnormalized(fene(10), v2(1, 0)) == doctest::Approx(std::pow(0.9, 5)).epsilon(1e-14));
  CHECK(maxwellian_unnormalized(fene(10), v2(1, 0)) == doctest::Approx(0.59049));
  const auto a = v2(0.3, -1.1), b = v2(1.4, 0.2);
  for (const auto& s : {hook(), fene(10)}) {
    const double r = maxwellian(s, a, 2) / maxwellian(s, b, 2);
    CHECK(r == doctest::Approx(std::exp(potential(s, 0.5 * b.squaredNorm()) - potential(s, 0.5 * a.squaredNorm()))));
    CHECK(maxwellian_normalizer(s, 2) > 0.0);
  }
  CHECK_THROWS(maxwellian(fene(10), v2(4, 0), 2));
}

TEST_CASE("vorticity split") {
  const auto I = vorticity_split(Eigen::MatrixXd::Identity(2, 2));
  CHECK(I.sigma.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  CHECK(I.omega.norm() == 0.0);
  Eigen::MatrixXd G(2, 2);
  G << 0, 1, 0, 0;
  const auto s = vorticity_split(G);
  Eigen::MatrixXd S(2, 2), W(2, 2);
  S << 0, 0.5, 0.5, 0;
  W << 0, 0.5, -0.5, 0;
  CHECK(s.sigma == S);
  CHECK(s.omega == W);
  std::mt19937_64 g(1);
  std::normal_distribution<double> N;
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd R(3, 3);
    for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = N(g);
    const auto v = vorticity_split(R);
    CHECK(v.omega == -v.omega.transpose());
    CHECK((v.sigma + v.omega - R).norm() < 1e-15);
    Eigen::VectorXd q(3);
    q << N(g), N(g), N(g);
    CHECK(std::abs(q.dot(v.omega * q)) < 1e-14);
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_WITH(validate(fene(1.5)), doctest::Contains("b > 2"));
  ModelParams m;
  m.alpha = 0.4;
  CHECK_THROWS_WITH(validate(m), doctest::Contains("(1/2, 1]"));
  m.alpha = 1.0;
  CHECK_NOTHROW(validate(m));
  m.eps = 0.0;
  CHECK_THROWS(validate(m));
}

TEST_CASE("nondimensionalization") {
  PhysicalParams p{1e-8, 1e-6, 4e-21, 1e3, 1e-3, 1e4, 1e-6, 1e-3};
  const Scales s = scales(p);
  CHECK(s.ell0 == doctest::Approx(6.32e-8).epsilon(1e-3));
  CHECK(s.ell0 == doctest::Approx(std::sqrt(4e-21 / 1e-6)));
  const ModelParams m = nondimensionalize(p, 0.75);
  CHECK(m.alpha == 0.75);
  CHECK(m.eps / (1.0 / (2.0 * m.lambda)) == doctest::Approx(std::pow(s.ell0 / (2.0 * p.L0), 2)));
  PhysicalParams p2 = p;
  p2.H *= 2.0;
  const ModelParams m2 = nondimensionalize(p2, 0.75);
  CHECK(m2.lambda == doctest::Approx(m.lambda / 2.0));
  CHECK(scales(p2).ell0 == doctest::Approx(s.ell0 / std::sqrt(2.0)));
  CHECK(m2.eps == m.eps);
  CHECK(m2.Re == m.Re);
  CHECK(m2.gamma_c == m.gamma_c);
  PhysicalParams bad = p;
  bad.N = 2.5;
  CHECK_THROWS(validate(bad));
}
