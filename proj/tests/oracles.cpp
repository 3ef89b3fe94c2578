#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "fnsfp/fractional_kernels.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double convolve(double order, const std::function<double(double)>& f, double t) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double c = 1.0 / std::tgamma(order);
  // substitute s = t - r so the kernel singularity sits at the left end
  return c * ts.integrate(
                 [&](double r) { return std::pow(r, order - 1.0) * f(t - r); }, 0.0, t);
}

IntegerOrderStepper::IntegerOrderStepper(const fnsfp::Discretization& d, double dt, bool coupling)
    : d_(d), dt_(dt), coupling_(coupling), ku_(d.ku()), kx_(d.kx()), kq_(d.kq()), N_(kx_ * kq_) {
  const int dim = d.model.dim;
  const int K = d.vb.shell;
  const fnsfp::TorusGrid g = fnsfp::make_torus_grid(dim, 4 * K + 2);
  w_ = g.weight;
  const Eigen::Index P = g.points.rows();
  X_.resize(P, static_cast<Eigen::Index>(kx_));
  std::vector<MatrixXd> GX(static_cast<std::size_t>(P));
  for (Eigen::Index p = 0; p < P; ++p) {
    const VectorXd x = g.points.row(p).transpose();
    xs_.push_back(x);
    MatrixXd H(ku_, dim);
    std::vector<MatrixXd> G;
    for (std::size_t i = 0; i < ku_; ++i) {
      H.row(static_cast<Eigen::Index>(i)) = d.vb.value(i, x).transpose();
      G.push_back(d.vb.gradient(i, x));
    }
    H_.push_back(H);
    GH_.push_back(G);
    MatrixXd gx(kx_, dim);
    for (std::size_t a = 0; a < kx_; ++a) {
      X_(p, static_cast<Eigen::Index>(a)) = d.sb.value(a, x);
      gx.row(static_cast<Eigen::Index>(a)) = d.sb.gradient(a, x).transpose();
    }
    GX[static_cast<std::size_t>(p)] = gx;
  }

  const auto& Q = d.quad;
  const Eigen::Index R = static_cast<Eigen::Index>(Q.size());
  const MatrixXd& Y = d.cb.values;  // kq x R
  const VectorXd mw = Eigen::Map<const VectorXd>(Q.mw.data(), R);
  const MatrixXd mass_q = Y * mw.asDiagonal() * Y.transpose();

  // dissipative operator
  MatrixXd stiff_q = MatrixXd::Zero(kq_, kq_);
  for (int j = 0; j < dim; ++j) stiff_q += d.cb.grads[j] * mw.asDiagonal() * d.cb.grads[j].transpose();
  MatrixXd stiff_x = MatrixXd::Zero(kx_, kx_);
  for (Eigen::Index p = 0; p < P; ++p) stiff_x += w_ * GX[p] * GX[p].transpose();
  const MatrixXd mass_x = w_ * X_.transpose() * X_;
  MatrixXd Ld = MatrixXd::Zero(N_, N_);
  for (std::size_t a = 0; a < kx_; ++a)
    for (std::size_t b = 0; b < kx_; ++b)
      for (std::size_t m = 0; m < kq_; ++m)
        for (std::size_t n = 0; n < kq_; ++n)
          Ld(a * kq_ + m, b * kq_ + n) = mass_x(a, b) * stiff_q(m, n) / (2.0 * d.model.lambda) +
                                         d.model.eps * stiff_x(a, b) * mass_q(m, n);
  lu_.compute(MatrixXd::Identity(N_, N_) + dt * Ld);

  // q-side rotation factor for every ordered pair (j, k): (Y_n q_k, d_j Y_m)_M
  std::vector<std::vector<MatrixXd>> Pq(dim, std::vector<MatrixXd>(dim));
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      VectorXd wq(R);
      for (Eigen::Index r = 0; r < R; ++r) wq(r) = mw(r) * Q.nodes(r, k);
      Pq[j][k] = d.cb.grads[j] * wq.asDiagonal() * Y.transpose();  // (m, n)
    }

  for (std::size_t i = 0; i < ku_; ++i) {
    MatrixXd Tx = MatrixXd::Zero(kx_, kx_);
    std::vector<std::vector<MatrixXd>> Om(dim, std::vector<MatrixXd>(dim, MatrixXd::Zero(kx_, kx_)));
    for (Eigen::Index p = 0; p < P; ++p) {
      const VectorXd hx = H_[p].row(static_cast<Eigen::Index>(i)).transpose();
      const VectorXd adv = GX[p] * hx;  // h_i . grad X_b
      Tx += w_ * X_.row(p).transpose() * adv.transpose();
      const MatrixXd& G = GH_[p][i];
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
          const double om = 0.5 * (G(j, k) - G(k, j));
          Om[j][k] += (w_ * om) * X_.row(p).transpose() * X_.row(p);
        }
    }
    MatrixXd T = MatrixXd::Zero(N_, N_), Rm = MatrixXd::Zero(N_, N_);
    for (std::size_t a = 0; a < kx_; ++a)
      for (std::size_t b = 0; b < kx_; ++b)
        for (std::size_t m = 0; m < kq_; ++m)
          for (std::size_t n = 0; n < kq_; ++n) {
            T(a * kq_ + m, b * kq_ + n) = Tx(a, b) * mass_q(m, n);
            double s = 0.0;
            for (int j = 0; j < dim; ++j)
              for (int k = 0; k < dim; ++k) s += Om[j][k](a, b) * Pq[j][k](m, n);
            Rm(a * kq_ + m, b * kq_ + n) = -s;
          }
    tr_.push_back(T);
    rot_.push_back(Rm);
  }

  visc_.resize(static_cast<Eigen::Index>(ku_));
  for (std::size_t l = 0; l < ku_; ++l) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < P; ++p) s += w_ * GH_[p][l].squaredNorm();
    visc_(static_cast<Eigen::Index>(l)) = s;
  }
}

VectorXd IntegerOrderStepper::advection(const VectorXd& u) const {
  const int dim = d_.model.dim;
  VectorXd B = VectorXd::Zero(static_cast<Eigen::Index>(ku_));
  for (std::size_t p = 0; p < xs_.size(); ++p) {
    const VectorXd ux = H_[p].transpose() * u;
    MatrixXd G = MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < ku_; ++i) G += u(static_cast<Eigen::Index>(i)) * GH_[p][i];
    const VectorXd conv = G * ux;  // (u . grad) u
    B += w_ * H_[p] * conv;
  }
  return B;
}

VectorXd IntegerOrderStepper::stress(const MatrixXd& psi) const {
  const int dim = d_.model.dim;
  const auto& Q = d_.quad;
  const MatrixXd vals = X_ * psi * d_.cb.values;  // points x nodes
  VectorXd s = VectorXd::Zero(static_cast<Eigen::Index>(ku_));
  for (std::size_t p = 0; p < xs_.size(); ++p) {
    MatrixXd C = MatrixXd::Zero(dim, dim);
    for (std::size_t r = 0; r < Q.size(); ++r) {
      const VectorXd q = Q.nodes.row(static_cast<Eigen::Index>(r)).transpose();
      const double up = fnsfp::potential_derivative(d_.model.spring, 0.5 * q.squaredNorm());
      C += (Q.mw[r] * up * vals(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r))) * q * q.transpose();
    }
    for (std::size_t l = 0; l < ku_; ++l)
      s(static_cast<Eigen::Index>(l)) += w_ * d_.model.gamma_c * C.cwiseProduct(GH_[p][l]).sum();
  }
  return s;
}

void IntegerOrderStepper::step(VectorXd& u, MatrixXd& psi) const {
  VectorXd r = advection(u);
  if (coupling_) r += stress(psi);
  const double nu = d_.model.nu();
  VectorXd u_new(u.size());
  for (Eigen::Index l = 0; l < u.size(); ++l) u_new(l) = (u(l) - dt_ * r(l)) / (1.0 + dt_ * nu * visc_(l));

  VectorXd v(static_cast<Eigen::Index>(N_));
  for (std::size_t a = 0; a < kx_; ++a)
    for (std::size_t m = 0; m < kq_; ++m) v(a * kq_ + m) = psi(a, m);
  MatrixXd La = MatrixXd::Zero(N_, N_);
  for (std::size_t i = 0; i < ku_; ++i) La += u(static_cast<Eigen::Index>(i)) * (tr_[i] + rot_[i]);
  const VectorXd vn = lu_.solve(v - dt_ * La * v);
  for (std::size_t a = 0; a < kx_; ++a)
    for (std::size_t m = 0; m < kq_; ++m) psi(a, m) = vn(a * kq_ + m);
  u = u_new;
}

void euler_maruyama(const fnsfp::mc::McParams& p, double h, fnsfp::mc::Rng& rng,
                    std::normal_distribution<double>& N, double* x, double* q,
                    const fnsfp::mc::VelocityField& vel) {
  const int d = p.dim;
  double u[3] = {0, 0, 0}, G[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  if (vel) vel(x, u, G);
  for (int k = 0; k < d; ++k) {
    x[k] = x[k] + u[k] * h + std::sqrt(2.0 * p.eps * h) * N(rng);
    x[k] = std::fmod(x[k], 2.0 * std::numbers::pi);
    if (x[k] < 0.0) x[k] += 2.0 * std::numbers::pi;
  }
  double r2 = 0.0;
  for (int k = 0; k < d; ++k) r2 += q[k] * q[k];
  double F = 0.0;
  if (p.spring.kind == fnsfp::SpringKind::Hookean) F = 1.0;
  if (p.spring.kind == fnsfp::SpringKind::FENE) F = 1.0 / (1.0 - r2 / p.spring.b);
  double mean[3];
  for (int j = 0; j < d; ++j) {
    double rot = 0.0;
    for (int k = 0; k < d; ++k) rot += 0.5 * (G[j * d + k] - G[k * d + j]) * q[k];
    mean[j] = q[j] + h * rot - h * F * q[j] / (2.0 * p.lambda);
  }
  for (int attempt = 0; attempt <= p.max_retries; ++attempt) {
    double prop[3], n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      prop[k] = mean[k] + std::sqrt(h / p.lambda) * N(rng);
      n2 += prop[k] * prop[k];
    }
    if (p.spring.kind != fnsfp::SpringKind::FENE || n2 < p.spring.b) {
      for (int k = 0; k < d; ++k) q[k] = prop[k];
      return;
    }
  }
}

std::vector<double> random_smooth_path(std::uint64_t seed, double dt, std::size_t n) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int K = 4;
  double a[K + 1], b[K + 1];
  for (int k = 0; k <= K; ++k) {
    a[k] = U(g) / (1.0 + k * k);
    b[k] = U(g) / (1.0 + k * k);
  }
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = dt * static_cast<double>(i);
    double s = a[0];
    for (int k = 1; k <= K; ++k) s += a[k] * std::cos(k * t) + b[k] * std::sin(k * t);
    v[i] = s;
  }
  return v;
}

}  // namespace oracle
