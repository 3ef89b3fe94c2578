#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fnsfp/fractional_kernels.hpp"
#include "fnsfp/galerkin.hpp"
#include "fnsfp/simd.hpp"

namespace fnsfp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Solver::Solver(const Discretization& d, const AssembledOperators& ops, SolverOptions opt,
               double dt, std::size_t n_steps)
    : d_(d), ops_(ops), opt_(opt), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double alpha = d.model.alpha;
  const double beta = 1.0 - alpha;
  dt_beta_ = std::pow(dt, beta);
  dt_alpha_ = dt / dt_beta_;
  w_ = fk::gl_weights(beta, n_steps);

  const Eigen::Index kq = static_cast<Eigen::Index>(ops.kq);
  const MatrixXd I = MatrixXd::Identity(kq, kq);
  const double dq = 1.0 / (2.0 * d.model.lambda);
  for (std::size_t a = 0; a < ops.kx; ++a) {
    diff_.push_back(dq * ops.stiffness_q + d.model.eps * ops.stiffness_xq(a) * I);
    const MatrixXd sys = I + (dt_alpha_ * w_[0]) * diff_.back();
    fact_.emplace_back(sys);
    if (fact_.back().info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sys, Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      std::ostringstream os;
      os << "Cholesky factorization failed for x-mode " << a << ", condition number "
         << ev.cwiseAbs().maxCoeff() / ev.cwiseAbs().minCoeff();
      throw StepError(os.str());
    }
  }
}

SpectralState Solver::initial_state(const VectorXd& u0, const MatrixXd& psi0) const {
  if (u0.size() != static_cast<Eigen::Index>(ops_.ku) ||
      psi0.rows() != static_cast<Eigen::Index>(ops_.kx) ||
      psi0.cols() != static_cast<Eigen::Index>(ops_.kq))
    throw std::invalid_argument("initial data does not match the basis sizes");
  const double m = mass(psi0);
  if (!(m > 0.0)) throw std::invalid_argument("initial density has nonpositive mass");
  if (std::abs(m - 1.0) > 1e-8) {
    std::ostringstream os;
    os.precision(17);
    os << "initial density must integrate to 1 against M, got " << m;
    throw std::invalid_argument(os.str());
  }
  SpectralState s;
  s.u = u0;
  s.psi = psi0;
  s.phi = (w_[0] / dt_beta_) * psi0;
  const auto append = [](std::vector<double>& h, const double* p, Eigen::Index n) {
    h.insert(h.end(), p, p + n);
  };
  const MatrixXd pr = psi0.transpose();  // row-major flattening
  const MatrixXd fr = s.phi.transpose();
  append(s.psi_hist, pr.data(), pr.size());
  append(s.phi_hist, fr.data(), fr.size());
  append(s.u_hist, u0.data(), u0.size());
  return s;
}

VectorXd Solver::velocity_update(const VectorXd& u, const MatrixXd& psi) const {
  VectorXd r = advection(ops_, u);
  if (opt_.coupling && d_.model.gamma_c != 0.0) r += stress_forcing(ops_, psi);
  const double nu = d_.model.nu();
  VectorXd out(u.size());
  for (Eigen::Index l = 0; l < u.size(); ++l)
    out(l) = (u(l) - dt_ * r(l)) / (1.0 + dt_ * nu * ops_.stiffness_x(l));
  return out;
}

// (I + dt^a w0 L_d) psi' = psi^n - dt^a [L_d H + L_a(u) (w0 psi^n + H)]
MatrixXd Solver::density_update(const SpectralState& s, const VectorXd& u,
                                const MatrixXd& hist) const {
  const MatrixXd expl = w_[0] * s.psi + hist;
  MatrixXd rhs = s.psi - dt_alpha_ * apply_transport_rotation(ops_, u, expl);
  MatrixXd out(s.psi.rows(), s.psi.cols());
  for (Eigen::Index a = 0; a < s.psi.rows(); ++a) {
    const VectorXd ra =
        rhs.row(a).transpose() - dt_alpha_ * (diff_[a] * hist.row(a).transpose());
    out.row(a) = fact_[a].solve(ra).transpose();
  }
  return out;
}

void Solver::step(SpectralState& s) const {
  const std::size_t n = s.step;
  if (n + 2 > w_.size())
    throw StepError("step " + std::to_string(n + 1) + " exceeds the configured horizon");
  const Eigen::Index kx = s.psi.rows(), kq = s.psi.cols();
  const std::size_t N = static_cast<std::size_t>(kx * kq);

  // H = sum_{j>=1} w_j psi^{n+1-j}, stored row-major like the history
  MatrixXd Ht(kq, kx);
  simd::history_sum(w_.data(), s.psi_hist.data(), n + 1, N, Ht.data());
  const MatrixXd H = Ht.transpose();

  VectorXd u_new = opt_.freeze_velocity ? s.u : velocity_update(s.u, s.psi);
  MatrixXd psi_new = density_update(s, s.u, H);

  if (opt_.picard && !opt_.freeze_velocity) {
    for (int it = 0; it < opt_.picard_max_iter; ++it) {
      const VectorXd u_it = velocity_update(s.u, 0.5 * (s.psi + psi_new));
      const MatrixXd psi_it = density_update(s, 0.5 * (s.u + u_it), H);
      const double du = (u_it - u_new).norm() / std::max(1.0, u_it.norm());
      const double dp = (psi_it - psi_new).norm() / std::max(1.0, psi_it.norm());
      u_new = u_it;
      psi_new = psi_it;
      if (std::max(du, dp) < opt_.picard_tol) break;
    }
  }

  const double drift = std::abs(mass(psi_new) - mass(s.psi));
  if (!(drift <= opt_.mass_tol) || !psi_new.allFinite() || !u_new.allFinite()) {
    std::ostringstream os;
    os.precision(17);
    os << "step " << n + 1 << " rejected: mass drift " << drift;
    throw StepError(os.str());
  }

  s.u = u_new;
  s.psi = psi_new;
  s.phi = (w_[0] * psi_new + H) / dt_beta_;
  s.step = n + 1;
  s.t = dt_ * static_cast<double>(s.step);
  const MatrixXd pr = s.psi.transpose();
  const MatrixXd fr = s.phi.transpose();
  s.psi_hist.insert(s.psi_hist.end(), pr.data(), pr.data() + pr.size());
  s.phi_hist.insert(s.phi_hist.end(), fr.data(), fr.data() + fr.size());
  s.u_hist.insert(s.u_hist.end(), s.u.data(), s.u.data() + s.u.size());
}

// ---- initial data ----

Preset parse_preset(const std::string& name) {
  if (name == "equilibrium") return Preset::Equilibrium;
  if (name == "shear-mode") return Preset::ShearMode;
  if (name == "gaussian-bump-x") return Preset::GaussianBumpX;
  if (name == "anisotropic-q") return Preset::AnisotropicQ;
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected equilibrium, shear-mode, gaussian-bump-x, anisotropic-q)");
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::Equilibrium: return "equilibrium";
    case Preset::ShearMode: return "shear-mode";
    case Preset::GaussianBumpX: return "gaussian-bump-x";
    case Preset::AnisotropicQ: return "anisotropic-q";
  }
  return "";
}

VectorXd project_velocity(const Discretization& d,
                          const std::function<VectorXd(const VectorXd&)>& f, int grid_n) {
  const TorusGrid g = grid_n > 0 ? make_torus_grid(d.model.dim, grid_n) : d.xgrid;
  VectorXd c = VectorXd::Zero(static_cast<Eigen::Index>(d.ku()));
  for (Eigen::Index p = 0; p < g.points.rows(); ++p) {
    const VectorXd x = g.points.row(p).transpose();
    const VectorXd fx = f(x);
    for (std::size_t i = 0; i < d.ku(); ++i)
      c(static_cast<Eigen::Index>(i)) += g.weight * d.vb.value(i, x).dot(fx);
  }
  return c;
}

VectorXd project_scalar_x(const Discretization& d, const std::function<double(const VectorXd&)>& f,
                          int grid_n) {
  const TorusGrid g = grid_n > 0 ? make_torus_grid(d.model.dim, grid_n) : d.xgrid;
  VectorXd c = VectorXd::Zero(static_cast<Eigen::Index>(d.kx()));
  for (Eigen::Index p = 0; p < g.points.rows(); ++p) {
    const VectorXd x = g.points.row(p).transpose();
    const double fx = f(x);
    for (std::size_t a = 0; a < d.kx(); ++a)
      c(static_cast<Eigen::Index>(a)) += g.weight * d.sb.value(a, x) * fx;
  }
  return c;
}

VectorXd project_config(const Discretization& d, const std::function<double(const VectorXd&)>& f) {
  const Eigen::Index nn = static_cast<Eigen::Index>(d.quad.size());
  VectorXd fv(nn);
  for (Eigen::Index n = 0; n < nn; ++n) fv(n) = d.quad.mw[n] * f(d.quad.nodes.row(n).transpose());
  return d.cb.values * fv;
}

InitialData initial_data(const Discretization& d, const InitialSpec& spec) {
  const int dim = d.model.dim;
  InitialData out;
  out.u = VectorXd::Zero(static_cast<Eigen::Index>(d.ku()));
  out.psi = MatrixXd::Zero(static_cast<Eigen::Index>(d.kx()), static_cast<Eigen::Index>(d.kq()));
  out.psi(0, 0) = 1.0;
  if (spec.preset == Preset::Equilibrium) return out;

  if (spec.preset != Preset::AnisotropicQ && spec.velocity_amplitude != 0.0) {
    const double U = spec.velocity_amplitude;
    out.u = project_velocity(d, [&](const VectorXd& x) {
      VectorXd v = VectorXd::Zero(dim);
      v(0) = U * std::sin(x(1));
      return v;
    });
  }

  const double sq = domain_radius_sq(d.model.spring);
  double mean_r2 = 0.0;
  for (std::size_t n = 0; n < d.quad.size(); ++n)
    mean_r2 += d.quad.mw[n] * d.quad.nodes.row(static_cast<Eigen::Index>(n)).squaredNorm();
  const double A = spec.psi_amplitude, R = spec.radial_amplitude;
  const VectorXd cq = project_config(d, [&](const VectorXd& q) {
    return 1.0 + A * (q(0) * q(0) - q(1) * q(1)) / sq + R * (q.squaredNorm() - mean_r2) / sq;
  });

  VectorXd cx = VectorXd::Zero(static_cast<Eigen::Index>(d.kx()));
  cx(0) = 1.0;
  if (spec.preset == Preset::GaussianBumpX && spec.bump_amplitude != 0.0) {
    const double kappa = 2.0;
    const auto bump = [&](const VectorXd& x) {
      double e = 0.0;
      for (int i = 0; i < dim; ++i) e += 1.0 - std::cos(x(i) - std::numbers::pi);
      return std::exp(-kappa * e);
    };
    VectorXd bx = project_scalar_x(d, bump, dim == 2 ? 64 : 24);
    bx(0) = 0.0;  // mean-free
    cx += spec.bump_amplitude * bx;
  }
  out.psi = cx * cq.transpose();
  out.psi(0, 0) = 1.0;
  return out;
}

}  // namespace fnsfp
