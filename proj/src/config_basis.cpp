#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "fnsfp/bases.hpp"

namespace fnsfp {
namespace {

std::vector<ConfigCandidate> candidates(int dim, int n_modes) {
  std::vector<ConfigCandidate> out;
  for (int deg = 0; static_cast<int>(out.size()) < n_modes; ++deg) {
    if (dim == 2) {
      for (int m = deg % 2; m <= deg; m += 2) {
        ConfigCandidate c;
        c.n = (deg - m) / 2;
        c.m = m;
        c.degree = deg;
        out.push_back(c);
        if (m > 0) {
          c.is_sin = true;
          out.push_back(c);
        }
      }
    } else {
      for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b) {
          ConfigCandidate c;
          c.pw = Eigen::Vector3i(a, b, deg - a - b);
          c.degree = deg;
          out.push_back(c);
        }
    }
  }
  out.resize(static_cast<std::size_t>(n_modes));
  return out;
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// value and gradient of one candidate at q
double eval_candidate(const ConfigCandidate& c, const Eigen::VectorXd& q, Eigen::VectorXd* grad) {
  if (c.pw.size() == 0) {
    const std::complex<double> z(q(0), q(1));
    std::complex<double> zm1(1.0, 0.0);
    for (int i = 0; i + 1 < c.m; ++i) zm1 *= z;
    const std::complex<double> zm = c.m == 0 ? std::complex<double>(1.0, 0.0) : zm1 * z;
    const double h = c.is_sin ? zm.imag() : zm.real();
    const double rho = q.squaredNorm();
    const double rn = ipow(rho, c.n);
    if (grad) {
      Eigen::VectorXd gh = Eigen::VectorXd::Zero(2);
      if (c.m > 0) {
        const double m = c.m;
        if (c.is_sin)
          gh << m * zm1.imag(), m * zm1.real();
        else
          gh << m * zm1.real(), -m * zm1.imag();
      }
      *grad = rn * gh;
      if (c.n > 0) *grad += (2.0 * c.n * ipow(rho, c.n - 1) * h) * q;
    }
    return rn * h;
  }
  const int d = static_cast<int>(c.pw.size());
  double v = 1.0;
  for (int i = 0; i < d; ++i) v *= ipow(q(i), c.pw(i));
  if (grad) {
    grad->setZero(d);
    for (int i = 0; i < d; ++i) {
      if (c.pw(i) == 0) continue;
      double g = c.pw(i) * ipow(q(i), c.pw(i) - 1);
      for (int j = 0; j < d; ++j)
        if (j != i) g *= ipow(q(j), c.pw(j));
      (*grad)(i) = g;
    }
  }
  return v;
}

}  // namespace

int config_basis_degree(int dim, int n_modes_q) {
  if (n_modes_q < 1) throw std::invalid_argument("n_modes_q must be >= 1");
  return candidates(dim, n_modes_q).back().degree;
}

ConfigBasis build_config_basis(const SpringModel& s, int dim, int n_modes_q,
                               const ConfigQuadrature& quad) {
  if (n_modes_q < 1 || n_modes_q > kMaxConfigModes)
    throw std::invalid_argument("n_modes_q must lie in [1, " + std::to_string(kMaxConfigModes) +
                                "]");
  if (quad.dim != dim) throw std::invalid_argument("quadrature dimension mismatch");
  ConfigBasis cb;
  cb.spring = s;
  cb.dim = dim;
  cb.candidates = candidates(dim, n_modes_q);
  cb.max_degree = cb.candidates.back().degree;
  if (quad.exact_degree < 2 * cb.max_degree + 2)
    throw std::invalid_argument("quadrature does not resolve the configuration basis degree");

  const Eigen::Index nc = n_modes_q, nn = static_cast<Eigen::Index>(quad.size());
  Eigen::MatrixXd V(nc, nn);
  std::vector<Eigen::MatrixXd> G(dim, Eigen::MatrixXd(nc, nn));
  Eigen::VectorXd g(dim);
  for (Eigen::Index k = 0; k < nn; ++k) {
    const Eigen::VectorXd q = quad.nodes.row(k).transpose();
    for (Eigen::Index c = 0; c < nc; ++c) {
      V(c, k) = eval_candidate(cb.candidates[c], q, &g);
      for (int d = 0; d < dim; ++d) G[d](c, k) = g(d);
    }
  }
  const Eigen::Map<const Eigen::VectorXd> mw(quad.mw.data(), nn);
  auto inner = [&](const Eigen::MatrixXd& A, Eigen::Index i, const Eigen::MatrixXd& B,
                   Eigen::Index j) { return (A.row(i).array() * B.row(j).array() * mw.transpose().array()).sum(); };

  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(nc, nc);
  for (Eigen::Index i = 0; i < nc; ++i) {
    const double n0 = std::sqrt(inner(V, i, V, i));
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < i; ++j) {
        const double p = inner(V, i, V, j);
        V.row(i) -= p * V.row(j);
        T.row(i) -= p * T.row(j);
      }
    const double n1 = std::sqrt(inner(V, i, V, i));
    if (!(n1 > 1e-10 * n0))
      throw std::runtime_error("configuration basis: Gram matrix is numerically singular at mode " +
                               std::to_string(i));
    V.row(i) /= n1;
    T.row(i) /= n1;
  }
  // constant mode: exactly 1
  T.row(0) /= T(0, 0);
  V.row(0).setOnes();

  cb.T = T;
  cb.values = V;
  cb.grads.resize(dim);
  for (int d = 0; d < dim; ++d) cb.grads[d] = T * G[d];

  const Eigen::MatrixXd gram = V * mw.asDiagonal() * V.transpose();
  const double err = (gram - Eigen::MatrixXd::Identity(nc, nc)).cwiseAbs().maxCoeff();
  if (err > 1e-10)
    throw std::runtime_error("configuration basis: Gram identity violated by " + std::to_string(err));
  return cb;
}

Eigen::VectorXd ConfigBasis::eval(const Eigen::VectorXd& q) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = eval_candidate(candidates[i], q, nullptr);
  return T * c;
}

Eigen::MatrixXd ConfigBasis::eval_gradient(const Eigen::VectorXd& q) const {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(candidates.size()), dim);
  Eigen::VectorXd g(dim);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    eval_candidate(candidates[i], q, &g);
    c.row(static_cast<Eigen::Index>(i)) = g.transpose();
  }
  return T * c;
}

}  // namespace fnsfp
