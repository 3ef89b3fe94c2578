#include <doctest.h>

#include <random>
#include <sstream>

#include "fnsfp/diagnostics.hpp"

using namespace fnsfp;

namespace {
struct Run {
  Discretization d;
  AssembledOperators ops;
  SpectralState s;
  double dt;
  Run(Preset preset, double alpha = 0.75, std::size_t n = 80, double dt_ = 5e-3, double U = 1.0)
      : d(make(alpha)), ops(assemble(d)), dt(dt_) {
    InitialSpec spec;
    spec.preset = preset;
    spec.velocity_amplitude = U;
    const InitialData init = initial_data(d, spec);
    const Solver solver(d, ops, {}, dt, n);
    s = solver.initial_state(init.u, init.psi);
    for (std::size_t i = 0; i < n; ++i) solver.step(s);
  }
  static Discretization make(double alpha) {
    ModelParams m;
    m.alpha = alpha;
    return make_discretization(m, 2, 15);
  }
  Eigen::MatrixXd random_psi(std::uint64_t seed) const {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> N;
    Eigen::MatrixXd V(static_cast<Eigen::Index>(ops.kx), static_cast<Eigen::Index>(ops.kq));
    for (auto& v : V.reshaped()) v = N(g);
    return V;
  }
};
}  // namespace

TEST_CASE("equilibrium ledger") {
  const Run r(Preset::Equilibrium);
  const auto recs = energy_ledger(r.d, r.ops, r.s, r.dt, r.dt * 80);
  CHECK(recs.size() == 81);
  for (const auto& x : recs) {
    CHECK(x.mass == 0.0);
    CHECK(x.u_energy < 1e-28);
    CHECK(x.corotational_residual < 1e-30);
    CHECK(x.energy_margin_log >= 0.0);
    CHECK(x.u_bound_lhs <= x.u_bound_rhs + 1e-28);
    CHECK(x.stress_norm <= x.stress_bound);
  }
  const auto strided = energy_ledger(r.d, r.ops, r.s, r.dt, r.dt * 80, 30);
  CHECK(strided.size() == 4);  // 0, 30, 60 and the last
  CHECK(strided.back().step == 80);
  CHECK(strided[1].energy_lhs == recs[30].energy_lhs);
}

TEST_CASE("ledger on a driven run") {
  for (double alpha : {0.75, 1.0}) {
    const Run r(Preset::ShearMode, alpha);
    const auto recs = energy_ledger(r.d, r.ops, r.s, r.dt, r.dt * 80);
    for (std::size_t n = 1; n < recs.size(); ++n) {
      CHECK(recs[n].energy_margin_log >= 0.0);
      CHECK(recs[n].u_bound_lhs <= recs[n].u_bound_rhs);
      CHECK(recs[n].grad_u_dissipation >= recs[n - 1].grad_u_dissipation);
      CHECK(recs[n].phi_x_integral >= recs[n - 1].phi_x_integral);
      CHECK(std::abs(recs[n].mass) < 1e-12);
      CHECK(recs[n].corotational_residual < 1e-10);
    }
    const Eigen::MatrixXd psi0 = Eigen::Map<const Eigen::MatrixXd>(r.s.psi_hist.data(), 15, 13).transpose();
    CHECK(initial_trace_error(r.s, alpha, r.dt, psi0) < 1e-6);
    CHECK(initial_trace_error(r.s, alpha, r.dt, 1.1 * psi0) > 1e-3);
    CHECK(history_consistency(r.s, alpha, r.dt) < 1e-8);
  }
  SpectralState broken = Run(Preset::ShearMode, 0.75, 4).s;
  broken.phi_hist.pop_back();
  const Run r(Preset::ShearMode, 0.75, 4);
  CHECK_THROWS_WITH(energy_ledger(r.d, r.ops, broken, r.dt, 1.0), doctest::Contains("history"));
}

TEST_CASE("energy constants scale with the initial data") {
  const Run r(Preset::ShearMode, 0.75, 1);
  const Eigen::VectorXd u0 = Eigen::Map<const Eigen::VectorXd>(r.s.u_hist.data(), static_cast<Eigen::Index>(r.ops.ku));
  const Eigen::MatrixXd psi0 = r.s.psi;
  const auto c1 = energy_constants(r.d, r.ops, u0, psi0, 1.0);
  const auto c2 = energy_constants(r.d, r.ops, 2.0 * u0, psi0, 1.0);
  CHECK(c2.u0_sq == doctest::Approx(4.0 * c1.u0_sq));
  CHECK(c2.velocity_rhs(0.5, 0.0) == doctest::Approx(4.0 * c1.velocity_rhs(0.5, 0.0)));
  CHECK(c2.velocity_rhs(0.5, 1.0) - c2.velocity_rhs(0.5, 0.0) ==
        doctest::Approx(c1.velocity_rhs(0.5, 1.0) - c1.velocity_rhs(0.5, 0.0)));
  CHECK(c2.log_bound(0.5) > c1.log_bound(0.5));
  CHECK(c1.log_bound(0.9) > c1.log_bound(0.1));
  const auto dc = energy_constants(r.d, r.ops, u0, psi0, 1.0, false);
  CHECK(dc.gamma_c == 0.0);
  CHECK(dc.velocity_rhs(0.5, 3.0) == doctest::Approx(0.5 * c1.u0_sq));
}

TEST_CASE("corotational checks") {
  const Run r(Preset::ShearMode, 0.75, 1);
  std::mt19937_64 g(2);
  std::normal_distribution<double> N;
  Eigen::VectorXd u(static_cast<Eigen::Index>(r.ops.ku));
  for (auto& v : u) v = N(g);
  const Eigen::MatrixXd phi = r.random_psi(4);
  CHECK(corotational_check(r.ops, u, phi) < 1e-12 * phi.squaredNorm() * u.norm());
  CHECK(corotational_check(r.ops, Eigen::VectorXd::Zero(u.size()), phi) == 0.0);
  const double e1 = corotational_check_perturbed(r.ops, u, phi, 1e-3);
  const double e2 = corotational_check_perturbed(r.ops, u, phi, 2e-3);
  CHECK(e1 > 1e-8);
  CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-6));
  CHECK(corotational_check_perturbed(r.ops, u, phi, 0.0) < 1e-12 * phi.squaredNorm() * u.norm());
}

TEST_CASE("stress bound and tensor") {
  const Run r(Preset::ShearMode, 0.75, 1);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Eigen::MatrixXd psi = r.random_psi(k);
    const StressCheck sc = stress_check(r.ops, psi);
    CHECK(sc.norm <= sc.bound);
  }
  Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(13, 15);
  eq(0, 0) = 1.0;
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  const KramersTensor t = kramers_tensor(r.d, r.ops, eq, x);
  const double g = r.d.model.gamma_c;
  CHECK((t.tau1 - g * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-8);
  CHECK((t.tau1 - t.tau2_plus).norm() < 1e-8);
  CHECK((t.tau2_plus + t.tau2_minus).norm() == 0.0);
}

TEST_CASE("q-marginal and total variation") {
  const Run r(Preset::Equilibrium, 0.75, 1);
  const mc::Histogram h = solver_q_marginal(r.d, r.s.psi, 12, std::sqrt(10.0));
  double s = 0.0;
  for (double v : h.mass) s += v;
  CHECK(s == doctest::Approx(1.0));
  // symmetric under q1 -> -q1
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) CHECK(h.mass[i * 12 + j] == doctest::Approx(h.mass[(11 - i) * 12 + j]).epsilon(1e-10));
  CHECK(total_variation(h, h) == 0.0);
  mc::Histogram a = mc::make_histogram({{0.0, 1.0, 2.0}}), b = a;
  a.mass = {1.0, 0.0};
  b.mass = {0.0, 1.0};
  CHECK(total_variation(a, b) == 1.0);
  CHECK_THROWS(total_variation(a, h));
  mc::Histogram c = mc::make_histogram({{0.0, 1.5, 2.0}});
  CHECK_THROWS(total_variation(a, c));
}

TEST_CASE("diagnostics CSV") {
  const Run r(Preset::ShearMode, 0.75, 3);
  std::ostringstream os;
  write_diagnostics_csv(os, energy_ledger(r.d, r.ops, r.s, r.dt, 3 * r.dt));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 18);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
}
