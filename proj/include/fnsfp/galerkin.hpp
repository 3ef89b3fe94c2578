#pragma once

#include <Eigen/Dense>
#include <Eigen/Cholesky>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fnsfp/bases.hpp"
#include "fnsfp/fene_model.hpp"
#include "fnsfp/quadrature.hpp"

namespace fnsfp {

// Bases, quadratures and model for one run. Density coefficients use the
// row-major tensor layout index = a * kq + m (x-mode a, q-mode m).
struct Discretization {
  ModelParams model;
  VelocityBasis vb;
  ScalarBasis sb;
  ConfigQuadrature quad;
  ConfigBasis cb;
  TorusGrid xgrid;

  std::size_t ku() const { return vb.size(); }
  std::size_t kx() const { return sb.size(); }
  std::size_t kq() const { return cb.size(); }
  std::size_t n_psi() const { return kx() * kq(); }
};

Discretization make_discretization(const ModelParams& m, int n_modes_x, int n_modes_q);

struct AssembledOperators {
  std::size_t ku = 0, kx = 0, kq = 0;
  Eigen::VectorXd stiffness_x;   // |k|^2 per velocity mode
  Eigen::MatrixXd stiffness_q;   // (grad Y_m, grad Y_n)_M
  Eigen::VectorXd stiffness_xq;  // |k|^2 per scalar x-mode
  std::vector<Eigen::MatrixXd> A;   // A[i](j, l) = ((h_i . grad) h_j, h_l)
  std::vector<Eigen::MatrixXd> Tx;  // Tx[i](a, b) = (X_a, (h_i . grad) X_b)

  // Corotational term per independent pair (j < k) of the antisymmetric
  // gradient: Wx[i][c](a, b) = int X_a X_b omega_jk(h_i),
  // Rq[c](m, n) = (q_k d_j Y_m - q_j d_k Y_m, Y_n)_M.
  std::vector<std::pair<int, int>> omega_pairs;
  std::vector<std::vector<Eigen::MatrixXd>> Wx;
  std::vector<Eigen::MatrixXd> Rq;

  // Symmetric-gradient analogue (j <= k), only for perturbation checks.
  std::vector<std::pair<int, int>> sigma_pairs;
  std::vector<std::vector<Eigen::MatrixXd>> Ws;
  std::vector<Eigen::MatrixXd> Sq;

  std::vector<Eigen::MatrixXd> Cq;  // C(M Y_m), dim x dim
  std::vector<Eigen::MatrixXd> S;   // S[l](a, m) = gamma_c (X_a C(M Y_m), grad h_l)
  double Cb = 0.0;                  // (int M |F q^T|^2)^{1/2}

  // Full per-velocity-mode matrices over tensor modes (test/diagnostic use).
  Eigen::MatrixXd transport_matrix(std::size_t i) const;
  Eigen::MatrixXd rotation_matrix(std::size_t i) const;
};

AssembledOperators assemble(const Discretization& d);

// Same contraction written after moving the x-derivative off omega(u) onto
// the x-modes; should agree with the rotation tensors to quadrature accuracy.
Eigen::MatrixXd rotation_matrix_by_parts(const Discretization& d, std::size_t i);

// L_a(u) V = sum_i u_i [Tx_i V - sum_c Wx_ic V Rq_c^T] on a kx x kq block.
Eigen::MatrixXd apply_transport_rotation(const AssembledOperators& ops, const Eigen::VectorXd& u,
                                         const Eigen::MatrixXd& V);
// Noncorotational part -sum_i u_i sum_c Ws_ic V Sq_c^T.
Eigen::MatrixXd apply_stretching(const AssembledOperators& ops, const Eigen::VectorXd& u,
                                 const Eigen::MatrixXd& V);
// Advection B_l(u, u) and stress s_l(psi).
Eigen::VectorXd advection(const AssembledOperators& ops, const Eigen::VectorXd& u);
Eigen::VectorXd stress_forcing(const AssembledOperators& ops, const Eigen::MatrixXd& psi);

class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  bool coupling = true;         // stress term in the momentum equation
  bool freeze_velocity = false;
  bool picard = false;
  int picard_max_iter = 5;
  double picard_tol = 1e-8;
  double mass_tol = 1e-10;
};

// One time level plus the full history needed by the memory term.
struct SpectralState {
  std::size_t step = 0;
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::MatrixXd psi;  // kx x kq
  Eigen::MatrixXd phi;  // kx x kq, GL derivative of order 1 - alpha
  // rows are time levels 0..step, flattened row-major
  std::vector<double> psi_hist;
  std::vector<double> phi_hist;
  std::vector<double> u_hist;
};

class Solver {
 public:
  Solver(const Discretization& d, const AssembledOperators& ops, SolverOptions opt, double dt,
         std::size_t n_steps);

  SpectralState initial_state(const Eigen::VectorXd& u0, const Eigen::MatrixXd& psi0) const;
  void step(SpectralState& s) const;

  double dt() const { return dt_; }
  const std::vector<double>& gl() const { return w_; }
  double mass(const Eigen::MatrixXd& psi) const { return psi(0, 0); }
  const SolverOptions& options() const { return opt_; }

 private:
  Eigen::VectorXd velocity_update(const Eigen::VectorXd& u, const Eigen::MatrixXd& psi) const;
  Eigen::MatrixXd density_update(const SpectralState& s, const Eigen::VectorXd& u,
                                 const Eigen::MatrixXd& hist) const;

  const Discretization& d_;
  const AssembledOperators& ops_;
  SolverOptions opt_;
  double dt_, dt_beta_, dt_alpha_;
  std::vector<double> w_;  // GL weights of order 1 - alpha
  std::vector<Eigen::LLT<Eigen::MatrixXd>> fact_;
  std::vector<Eigen::MatrixXd> diff_;  // per x-mode dissipative block
};

// Initial data. Each preset is (1 + B g(x)) (1 + A a(q) + R r(q)) for psi
// with a(q) = (q1^2 - q2^2)/s_q, r(q) = (|q|^2 - E_M|q|^2)/s_q, s_q = R_D^2,
// g a mean-free periodic bump, and u = U (sin x2, 0, ...).
enum class Preset { Equilibrium, ShearMode, GaussianBumpX, AnisotropicQ };

struct InitialSpec {
  Preset preset = Preset::ShearMode;
  double velocity_amplitude = 1.0;
  double psi_amplitude = 0.3;
  double bump_amplitude = 0.5;
  double radial_amplitude = 0.0;
};

Preset parse_preset(const std::string& name);
std::string preset_name(Preset p);

struct InitialData {
  Eigen::VectorXd u;
  Eigen::MatrixXd psi;
};
InitialData initial_data(const Discretization& d, const InitialSpec& spec);

// L2 projections onto the active bases.
Eigen::VectorXd project_velocity(const Discretization& d,
                                 const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 int grid_n = 0);
Eigen::VectorXd project_scalar_x(const Discretization& d,
                                 const std::function<double(const Eigen::VectorXd&)>& f,
                                 int grid_n = 0);
Eigen::VectorXd project_config(const Discretization& d,
                               const std::function<double(const Eigen::VectorXd&)>& f);

}  // namespace fnsfp
