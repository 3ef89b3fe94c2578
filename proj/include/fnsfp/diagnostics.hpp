#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "fnsfp/galerkin.hpp"
#include "fnsfp/langevin_mc.hpp"

namespace fnsfp {

struct DiagnosticRecord {
  std::size_t step = 0;
  double t = 0.0;
  double mass = 0.0;                // int int M psi_hat - 1
  double u_energy = 0.0;            // 1/2 |u|^2
  double grad_u_dissipation = 0.0;  // int_0^t |grad u|^2
  double phi_l2 = 0.0;
  double phi_grad_q = 0.0;
  double phi_grad_x = 0.0;
  double memory_term = 0.0;     // (g_{1-a} * |phi - psi0 g_a|^2)(t)
  double phi_x_integral = 0.0;  // int_0^t |phi|^2_X
  double energy_lhs = 0.0;
  double energy_rhs_log = 0.0;  // natural log of the bound, which overflows doubles
  double energy_rhs_bound = 0.0;
  double energy_margin_log = 0.0;  // energy_rhs_log - log(energy_lhs)
  double u_bound_lhs = 0.0;
  double u_bound_rhs = 0.0;
  double corotational_residual = 0.0;
  double stress_norm = 0.0;
  double stress_bound = 0.0;
};

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRecord>& recs);

// Constants of the combined a-priori bound for initial data (u0, psi0) on
// [0, T]; see the ledger for the chain of estimates.
struct EnergyConstants {
  double alpha = 1.0, T = 1.0;
  double kappa = 0.0, delta = 0.0, c_alpha = 0.0;
  double K0 = 0.0, K2 = 0.0, K3 = 0.0, Rq2 = 0.0;
  double A_u = 0.0, B0 = 0.0;
  double G = 0.0, gamma_e = 0.0, a_phi = 0.0, m = 0.0;
  double Cb = 0.0, gamma_c = 0.0, nu = 0.0, lambda = 0.0, eps = 0.0;
  double u0_sq = 0.0, psi0_sq = 0.0;

  double log_bound(double t) const;
  // 1/2 |u0|^2 + gamma_c^2 Cb^2 g_{2-a}(t)^2 / (2 nu) * phi_int
  double velocity_rhs(double t, double phi_int) const;
};

EnergyConstants energy_constants(const Discretization& d, const AssembledOperators& ops,
                                 const Eigen::VectorXd& u0, const Eigen::MatrixXd& psi0,
                                 double T, bool coupling = true);

// One record per `stride` steps (and always the last). Needs the full history.
std::vector<DiagnosticRecord> energy_ledger(const Discretization& d, const AssembledOperators& ops,
                                            const SpectralState& s, double dt, double T,
                                            std::size_t stride = 1, bool coupling = true);

double mass_check(const Eigen::MatrixXd& psi);

// 2 <V, Rot(u) V>: the rotation term's contribution to d/dt |V|^2.
double rotation_energy(const AssembledOperators& ops, const Eigen::VectorXd& u,
                       const Eigen::MatrixXd& V);
double corotational_check(const AssembledOperators& ops, const Eigen::VectorXd& u,
                          const Eigen::MatrixXd& phi);
// omega -> omega + eta sigma
double corotational_check_perturbed(const AssembledOperators& ops, const Eigen::VectorXd& u,
                                    const Eigen::MatrixXd& phi, double eta);

struct StressCheck {
  double norm = 0.0;   // |C(M psi_hat)|_{L2_x, Frobenius}
  double bound = 0.0;  // Cb |psi_hat|
};
StressCheck stress_check(const AssembledOperators& ops, const Eigen::MatrixXd& psi);
// sum_m c_m C(M Y_m)
Eigen::MatrixXd kramers_stress(const AssembledOperators& ops, const Eigen::VectorXd& coef);

// Full tensor at x: gamma C plus the isotropic part with either sign.
struct KramersTensor {
  Eigen::MatrixXd tau1, tau2_plus, tau2_minus;
};
KramersTensor kramers_tensor(const Discretization& d, const AssembledOperators& ops,
                             const Eigen::MatrixXd& psi, const Eigen::VectorXd& x);

// (g_{1-a} * phi)(0) from the discrete inverse of the GL derivative, and the
// largest mismatch of that reconstruction against the stored psi history.
double initial_trace_error(const SpectralState& s, double alpha, double dt,
                           const Eigen::MatrixXd& psi0);
double history_consistency(const SpectralState& s, double alpha, double dt);

// x-averaged q-marginal of M psi_hat binned like the Monte-Carlo histogram.
mc::Histogram solver_q_marginal(const Discretization& d, const Eigen::MatrixXd& psi, int q_bins,
                                double q_range, int sub = 16);

double total_variation(const mc::Histogram& a, const mc::Histogram& b);

}  // namespace fnsfp
