#include "fnsfp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fnsfp/fractional_kernels.hpp"

namespace fnsfp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double g_kernel(double order, double t) { return fk::kernel_eval(order, t); }

// Points covering the configuration domain, boundary included.
std::vector<VectorXd> sup_sample(int dim, double R) {
  std::vector<VectorXd> pts;
  const int nr = dim == 2 ? 40 : 16;
  for (int i = 0; i <= nr; ++i) {
    const double r = R * i / nr;
    if (dim == 2) {
      for (int k = 0; k < 96; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 96;
        VectorXd q(2);
        q << r * std::cos(th), r * std::sin(th);
        pts.push_back(q);
      }
    } else {
      for (int a = 0; a <= 16; ++a)
        for (int k = 0; k < 32; ++k) {
          const double ct = -1.0 + 2.0 * a / 16, st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
          const double ph = 2.0 * std::numbers::pi * k / 32;
          VectorXd q(3);
          q << r * st * std::cos(ph), r * st * std::sin(ph), r * ct;
          pts.push_back(q);
        }
    }
    if (i == 0) pts.resize(1);
  }
  return pts;
}

double x_grad_sq(const AssembledOperators& ops, const MatrixXd& V) {
  double s = 0.0;
  for (Eigen::Index a = 0; a < V.rows(); ++a) s += ops.stiffness_xq(a) * V.row(a).squaredNorm();
  return s;
}

double q_grad_sq(const AssembledOperators& ops, const MatrixXd& V) {
  return (V * ops.stiffness_q).cwiseProduct(V).sum();
}

}  // namespace

EnergyConstants energy_constants(const Discretization& d, const AssembledOperators& ops,
                                 const VectorXd& u0, const MatrixXd& psi0, double T,
                                 bool coupling) {
  EnergyConstants c;
  const double a = d.model.alpha;
  c.alpha = a;
  c.T = T;
  c.Cb = ops.Cb;
  c.gamma_c = coupling ? d.model.gamma_c : 0.0;
  c.nu = d.model.nu();
  c.lambda = d.model.lambda;
  c.eps = d.model.eps;
  c.u0_sq = u0.squaredNorm();
  c.psi0_sq = psi0.squaredNorm();
  c.Rq2 = domain_radius_sq(d.model.spring);

  // sup over x and q of the initial density's derivatives, bounded mode by mode
  const auto pts = sup_sample(d.model.dim, std::sqrt(c.Rq2));
  for (Eigen::Index r = 0; r < psi0.rows(); ++r) {
    const double sa = d.sb.sup_norm(r);
    const double row = psi0.row(r).norm();
    c.K0 += sa * row;
    if (row == 0.0) continue;
    double g = 0.0;
    for (const auto& q : pts) g = std::max(g, (d.cb.eval_gradient(q).transpose() * psi0.row(r).transpose()).norm());
    c.K2 += sa * g;
    c.K3 += sa * std::sqrt(d.sb.modes[r].k2) * g;
  }
  c.K3 *= 0.5 * (1.0 + std::sqrt(static_cast<double>(d.model.dim)));

  c.G = g_kernel(2.0 - a, T);
  if (a < 1.0) {
    c.kappa = std::pow(T, -a) / std::tgamma(1.0 - a);
    c.delta = c.kappa / 16.0;
    c.c_alpha = std::tgamma(2.0 * a - 1.0) / (std::tgamma(a) * std::tgamma(a));
    c.A_u = 2.0 * (c.K0 * c.K0 + c.Rq2 * c.K2 * c.K2) / c.eps + c.Rq2 * c.K3 * c.K3 / (4.0 * c.delta);
    c.B0 = q_grad_sq(ops, psi0) / (4.0 * c.lambda) + c.eps * x_grad_sq(ops, psi0);
    const double s = c.gamma_c * c.gamma_c * c.Cb * c.Cb * c.G * c.G;
    c.gamma_e = 1.0 + 16.0 * s / (c.nu * c.kappa);
    c.a_phi = c.gamma_e * c.kappa / 16.0 - s / (2.0 * c.nu);
    c.m = std::min({c.gamma_e / 4.0, c.a_phi, c.gamma_e / (4.0 * c.lambda), c.gamma_e * c.eps / 2.0,
                    0.5, c.nu / 2.0});
  }
  return c;
}

double EnergyConstants::log_bound(double t) const {
  if (alpha >= 1.0) {
    const double fp = psi0_sq * (4.0 + t + lambda + 1.0 / (2.0 * eps));
    const double ns = std::max(1.0, 1.0 / nu) * (u0_sq + gamma_c * gamma_c * Cb * Cb * t * psi0_sq / nu);
    return std::log(fp + ns);
  }
  const double g2a = g_kernel(2.0 * alpha, t);
  const double C0 = 0.5 * u0_sq + gamma_e * c_alpha * g2a * (B0 + kappa * psi0_sq / 4.0);
  return std::log(C0 / m) + gamma_e * c_alpha * A_u * g2a / m;
}

double EnergyConstants::velocity_rhs(double t, double phi_int) const {
  const double Gt = g_kernel(2.0 - alpha, t);
  return 0.5 * u0_sq + gamma_c * gamma_c * Cb * Cb * Gt * Gt / (2.0 * nu) * phi_int;
}

std::vector<DiagnosticRecord> energy_ledger(const Discretization& d, const AssembledOperators& ops,
                                            const SpectralState& s, double dt, double T,
                                            std::size_t stride, bool coupling) {
  const std::size_t kx = ops.kx, kq = ops.kq, ku = ops.ku, N = kx * kq;
  const std::size_t n_lv = s.step + 1;
  if (s.psi_hist.size() != n_lv * N || s.phi_hist.size() != n_lv * N || s.u_hist.size() != n_lv * ku)
    throw std::runtime_error("energy ledger: state is missing its history");
  if (stride == 0) stride = 1;
  const double a = d.model.alpha, nu = d.model.nu();
  const auto level = [&](const std::vector<double>& h, std::size_t n) {
    // stored row-major (a, m); map as kq x kx column-major then transpose
    return MatrixXd(Eigen::Map<const MatrixXd>(h.data() + n * N, kq, kx).transpose());
  };
  const Eigen::Map<const VectorXd> u0(s.u_hist.data(), ku);
  const MatrixXd psi0 = level(s.psi_hist, 0);
  const EnergyConstants c = energy_constants(d, ops, u0, psi0, T, coupling);

  // per-level norms
  std::vector<double> phi2(n_lv), phiq(n_lv), phix(n_lv), ugrad(n_lv), dev(n_lv, 0.0);
  fk::SampledPath devp(fk::TimeGrid(dt, std::max<std::size_t>(s.step, 1)), 1);
  for (std::size_t n = 0; n < n_lv; ++n) {
    const MatrixXd phi = level(s.phi_hist, n);
    phi2[n] = phi.squaredNorm();
    phiq[n] = q_grad_sq(ops, phi);
    phix[n] = x_grad_sq(ops, phi);
    const Eigen::Map<const VectorXd> u(s.u_hist.data() + n * ku, ku);
    ugrad[n] = u.cwiseAbs2().dot(ops.stiffness_x);
    if (n > 0) {
      const double ga = a < 1.0 ? g_kernel(a, dt * static_cast<double>(n)) : 1.0;
      dev[n] = (phi - ga * psi0).squaredNorm();
      devp.values[n] = dev[n];
    }
  }
  std::vector<double> memory(n_lv, 0.0);
  if (s.step > 0) {
    if (a < 1.0) {
      const fk::SampledPath conv = fk::fractional_convolve(1.0 - a, devp);
      for (std::size_t n = 1; n < n_lv; ++n) memory[n] = conv.values[n];
    } else {
      memory = dev;
    }
  }

  std::vector<DiagnosticRecord> out;
  double int_phi = 0.0, int_phix = 0.0, int_grad_u = 0.0;
  for (std::size_t n = 0; n < n_lv; ++n) {
    if (n == 1) {
      // phi ~ t^{a-1} near 0
      const double f = dt / (2.0 * a - 1.0);
      int_phi += f * phi2[1];
      int_phix += f * (phi2[1] + phiq[1] + phix[1]);
    } else if (n > 1) {
      int_phi += 0.5 * dt * (phi2[n] + phi2[n - 1]);
      int_phix += 0.5 * dt * (phi2[n] + phiq[n] + phix[n] + phi2[n - 1] + phiq[n - 1] + phix[n - 1]);
    }
    if (n > 0) int_grad_u += dt * ugrad[n];
    if (n % stride != 0 && n + 1 != n_lv) continue;

    const MatrixXd psi = level(s.psi_hist, n);
    const MatrixXd phi = level(s.phi_hist, n);
    const Eigen::Map<const VectorXd> u(s.u_hist.data() + n * ku, ku);
    DiagnosticRecord r;
    r.step = n;
    r.t = dt * static_cast<double>(n);
    r.mass = mass_check(psi);
    r.u_energy = 0.5 * u.squaredNorm();
    r.grad_u_dissipation = int_grad_u;
    r.phi_l2 = std::sqrt(phi2[n]);
    r.phi_grad_q = std::sqrt(phiq[n]);
    r.phi_grad_x = std::sqrt(phix[n]);
    r.memory_term = memory[n];
    r.phi_x_integral = int_phix;
    r.energy_lhs = memory[n] + int_phix + u.squaredNorm() + int_grad_u;
    if (n == 0) {
      r.energy_rhs_log = c.log_bound(std::max(r.t, dt));
    } else {
      r.energy_rhs_log = c.log_bound(r.t);
    }
    r.energy_rhs_bound = std::exp(r.energy_rhs_log);
    r.energy_margin_log = r.energy_lhs > 0.0 ? r.energy_rhs_log - std::log(r.energy_lhs) : INFINITY;
    r.u_bound_lhs = 0.5 * u.squaredNorm() + 0.5 * nu * int_grad_u;
    r.u_bound_rhs = c.velocity_rhs(std::max(r.t, dt), int_phi);
    r.corotational_residual = corotational_check(ops, u, phi);
    const StressCheck sc = stress_check(ops, psi);
    r.stress_norm = sc.norm;
    r.stress_bound = sc.bound;
    out.push_back(r);
  }
  return out;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRecord>& recs) {
  os << "step,t,mass,u_energy,grad_u_dissipation,phi_l2,phi_grad_q,phi_grad_x,memory_term,"
        "phi_x_integral,energy_lhs,energy_rhs_log,energy_rhs_bound,energy_margin_log,u_bound_lhs,"
        "u_bound_rhs,corotational_residual,stress_norm,stress_bound\n";
  const auto old = os.precision(17);
  for (const auto& r : recs)
    os << r.step << ',' << r.t << ',' << r.mass << ',' << r.u_energy << ',' << r.grad_u_dissipation
       << ',' << r.phi_l2 << ',' << r.phi_grad_q << ',' << r.phi_grad_x << ',' << r.memory_term << ','
       << r.phi_x_integral << ',' << r.energy_lhs << ',' << r.energy_rhs_log << ','
       << r.energy_rhs_bound << ',' << r.energy_margin_log << ',' << r.u_bound_lhs << ','
       << r.u_bound_rhs << ',' << r.corotational_residual << ',' << r.stress_norm << ','
       << r.stress_bound << '\n';
  os.precision(old);
}

double mass_check(const MatrixXd& psi) { return psi(0, 0) - 1.0; }

double rotation_energy(const AssembledOperators& ops, const VectorXd& u, const MatrixXd& V) {
  const Eigen::Index kx = static_cast<Eigen::Index>(ops.kx);
  double e = 0.0;
  for (std::size_t c = 0; c < ops.Rq.size(); ++c) {
    MatrixXd W = MatrixXd::Zero(kx, kx);
    for (std::size_t i = 0; i < ops.ku; ++i) W += u(static_cast<Eigen::Index>(i)) * ops.Wx[i][c];
    e -= (W * V * ops.Rq[c].transpose()).cwiseProduct(V).sum();
  }
  return 2.0 * e;
}

double corotational_check(const AssembledOperators& ops, const VectorXd& u, const MatrixXd& phi) {
  if (u.isZero(0.0)) return 0.0;
  return std::abs(rotation_energy(ops, u, phi));
}

double corotational_check_perturbed(const AssembledOperators& ops, const VectorXd& u,
                                    const MatrixXd& phi, double eta) {
  const double stretch = 2.0 * apply_stretching(ops, u, phi).cwiseProduct(phi).sum();
  return std::abs(rotation_energy(ops, u, phi) + eta * stretch);
}

Eigen::MatrixXd kramers_stress(const AssembledOperators& ops, const VectorXd& coef) {
  MatrixXd C = MatrixXd::Zero(ops.Cq.front().rows(), ops.Cq.front().cols());
  for (Eigen::Index m = 0; m < coef.size(); ++m) C += coef(m) * ops.Cq[m];
  return C;
}

StressCheck stress_check(const AssembledOperators& ops, const MatrixXd& psi) {
  StressCheck s;
  double n2 = 0.0;
  for (Eigen::Index a = 0; a < psi.rows(); ++a)
    n2 += kramers_stress(ops, psi.row(a).transpose()).squaredNorm();
  s.norm = std::sqrt(n2);
  s.bound = ops.Cb * psi.norm();
  return s;
}

KramersTensor kramers_tensor(const Discretization& d, const AssembledOperators& ops,
                             const MatrixXd& psi, const VectorXd& x) {
  VectorXd coef = VectorXd::Zero(psi.cols());
  double dens = 0.0;
  for (Eigen::Index a = 0; a < psi.rows(); ++a) {
    const double X = d.sb.value(a, x);
    coef += X * psi.row(a).transpose();
    dens += X * psi(a, 0);
  }
  const double g = d.model.gamma_c;
  const MatrixXd I = MatrixXd::Identity(d.model.dim, d.model.dim);
  return {g * kramers_stress(ops, coef), g * dens * I, -g * dens * I};
}

namespace {

// psi^n rebuilt from phi by the discrete inverse of the GL derivative
MatrixXd reconstruct(const SpectralState& s, double alpha, double dt, std::size_t n) {
  const double beta = 1.0 - alpha;
  const Eigen::Index kx = s.psi.rows(), kq = s.psi.cols();
  const std::size_t N = static_cast<std::size_t>(kx * kq);
  double v = 1.0;
  VectorXd acc = VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::size_t j = 0; j <= n; ++j) {
    if (j > 0) v *= 1.0 - (1.0 - beta) / static_cast<double>(j);
    acc += v * Eigen::Map<const VectorXd>(s.phi_hist.data() + (n - j) * N, static_cast<Eigen::Index>(N));
  }
  acc *= std::pow(dt, beta);
  return Eigen::Map<const MatrixXd>(acc.data(), kq, kx).transpose();
}

}  // namespace

double initial_trace_error(const SpectralState& s, double alpha, double dt, const MatrixXd& psi0) {
  return (reconstruct(s, alpha, dt, 0) - psi0).cwiseAbs().maxCoeff();
}

double history_consistency(const SpectralState& s, double alpha, double dt) {
  const Eigen::Index kx = s.psi.rows(), kq = s.psi.cols();
  const std::size_t N = static_cast<std::size_t>(kx * kq);
  double err = 0.0;
  for (std::size_t n = 0; n <= s.step; ++n) {
    const MatrixXd ref = Eigen::Map<const MatrixXd>(s.psi_hist.data() + n * N, kq, kx).transpose();
    err = std::max(err, (reconstruct(s, alpha, dt, n) - ref).cwiseAbs().maxCoeff());
  }
  return err;
}

mc::Histogram solver_q_marginal(const Discretization& d, const MatrixXd& psi, int q_bins,
                                double q_range, int sub) {
  const int dim = d.model.dim;
  std::vector<std::vector<double>> edges(dim);
  for (auto& e : edges)
    for (int k = 0; k <= q_bins; ++k) e.push_back(-q_range + 2.0 * q_range * k / q_bins);
  mc::Histogram h = mc::make_histogram(edges);
  const VectorXd c0 = psi.row(0).transpose();  // x-average
  const double bw = 2.0 * q_range / q_bins, sw = bw / sub;
  std::size_t cells = 1;
  for (int k = 0; k < dim; ++k) cells *= static_cast<std::size_t>(sub);
  VectorXd q(dim);
  for (std::size_t b = 0; b < h.mass.size(); ++b) {
    std::vector<int> bi(dim);
    std::size_t r = b;
    for (int k = dim; k-- > 0;) {
      bi[k] = static_cast<int>(r % q_bins);
      r /= q_bins;
    }
    double m = 0.0;
    for (std::size_t cI = 0; cI < cells; ++cI) {
      std::size_t rr = cI;
      for (int k = 0; k < dim; ++k) {
        const int si = static_cast<int>(rr % sub);
        rr /= sub;
        q(k) = -q_range + bi[k] * bw + (si + 0.5) * sw;
      }
      if (d.model.spring.kind == SpringKind::FENE && q.squaredNorm() >= d.model.spring.b) continue;
      const double M = maxwellian(d.model.spring, q, dim);
      if (M == 0.0) continue;
      m += M * d.cb.eval(q).dot(c0);
    }
    h.mass[b] = std::max(m, 0.0);
  }
  double tot = 0.0;
  for (double m : h.mass) tot += m;
  if (!(tot > 0.0)) throw std::runtime_error("solver marginal has no mass in the binned range");
  for (double& m : h.mass) m /= tot;
  return h;
}

double total_variation(const mc::Histogram& a, const mc::Histogram& b) {
  if (a.edges.size() != b.edges.size() || a.mass.size() != b.mass.size())
    throw std::invalid_argument("histograms have different bin layouts");
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    if (a.edges[k].size() != b.edges[k].size())
      throw std::invalid_argument("histograms have different bin layouts");
    for (std::size_t j = 0; j < a.edges[k].size(); ++j)
      if (std::abs(a.edges[k][j] - b.edges[k][j]) > 1e-9 * (1.0 + std::abs(a.edges[k][j])))
        throw std::invalid_argument("histogram bin edges differ");
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) tv += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * tv;
}

}  // namespace fnsfp
