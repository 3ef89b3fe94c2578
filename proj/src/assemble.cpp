#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fnsfp/galerkin.hpp"
#include "fnsfp/parallel.hpp"

namespace fnsfp {

Discretization make_discretization(const ModelParams& m, int n_modes_x, int n_modes_q) {
  validate(m);
  if (n_modes_x < 1) throw std::invalid_argument("n_modes_x must be >= 1");
  Discretization d;
  d.model = m;
  d.vb = build_velocity_basis(m.dim, n_modes_x);
  d.sb = build_scalar_basis(m.dim, n_modes_x);
  const int p = config_basis_degree(m.dim, n_modes_q);
  d.quad = make_config_quadrature(m.spring, m.dim, std::max(2 * p + 4, 8));
  d.cb = build_config_basis(m.spring, m.dim, n_modes_q, d.quad);
  // triple products of modes with |k| <= K are trigonometric of degree 3K
  d.xgrid = make_torus_grid(m.dim, 3 * n_modes_x + 2);
  return d;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct XTables {
  MatrixXd X;                           // kx x np
  std::vector<MatrixXd> Xg;             // [l] kx x np
  std::vector<MatrixXd> H;              // [j] ku x np, component j
  std::vector<std::vector<MatrixXd>> Hg;  // [j][l] ku x np, d_l h_j
  double w = 0.0;
};

XTables tabulate_x(const Discretization& d) {
  const int dim = d.model.dim;
  const Eigen::Index np = d.xgrid.points.rows();
  const Eigen::Index ku = static_cast<Eigen::Index>(d.ku()), kx = static_cast<Eigen::Index>(d.kx());
  XTables t;
  t.w = d.xgrid.weight;
  t.X.resize(kx, np);
  t.Xg.assign(dim, MatrixXd(kx, np));
  t.H.assign(dim, MatrixXd(ku, np));
  t.Hg.assign(dim, std::vector<MatrixXd>(dim, MatrixXd(ku, np)));
  for (Eigen::Index p = 0; p < np; ++p) {
    const VectorXd x = d.xgrid.points.row(p).transpose();
    for (Eigen::Index a = 0; a < kx; ++a) {
      t.X(a, p) = d.sb.value(a, x);
      const VectorXd g = d.sb.gradient(a, x);
      for (int l = 0; l < dim; ++l) t.Xg[l](a, p) = g(l);
    }
    for (Eigen::Index i = 0; i < ku; ++i) {
      const VectorXd h = d.vb.value(i, x);
      const MatrixXd G = d.vb.gradient(i, x);
      for (int j = 0; j < dim; ++j) {
        t.H[j](i, p) = h(j);
        for (int l = 0; l < dim; ++l) t.Hg[j][l](i, p) = G(j, l);
      }
    }
  }
  return t;
}

// P[j][k](m, n) = (q_k d_j Y_m, Y_n)_M
std::vector<std::vector<MatrixXd>> q_rotation_blocks(const Discretization& d) {
  const int dim = d.model.dim;
  const auto& cb = d.cb;
  const Eigen::Index nn = static_cast<Eigen::Index>(d.quad.size());
  const Eigen::Map<const VectorXd> mw(d.quad.mw.data(), nn);
  std::vector<std::vector<MatrixXd>> P(dim, std::vector<MatrixXd>(dim));
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      const VectorXd wk = mw.cwiseProduct(d.quad.nodes.col(k));
      P[j][k] = cb.grads[j] * wk.asDiagonal() * cb.values.transpose();
    }
  return P;
}

void kron_add(double s, const MatrixXd& A, const MatrixXd& B, MatrixXd& out) {
  for (Eigen::Index a = 0; a < A.rows(); ++a)
    for (Eigen::Index b = 0; b < A.cols(); ++b) {
      const double c = s * A(a, b);
      if (c != 0.0) out.block(a * B.rows(), b * B.cols(), B.rows(), B.cols()) += c * B;
    }
}

void require_finite(const MatrixXd& M, const char* what) {
  if (!M.allFinite())
    throw std::runtime_error(std::string("assembly: non-finite entries in ") + what +
                             " (configuration quadrature diverged)");
}

}  // namespace

AssembledOperators assemble(const Discretization& d) {
  const int dim = d.model.dim;
  AssembledOperators ops;
  ops.ku = d.ku();
  ops.kx = d.kx();
  ops.kq = d.kq();
  const Eigen::Index ku = static_cast<Eigen::Index>(ops.ku), kx = static_cast<Eigen::Index>(ops.kx);

  ops.stiffness_x.resize(ku);
  for (Eigen::Index i = 0; i < ku; ++i) ops.stiffness_x(i) = d.vb.modes[i].k2;
  ops.stiffness_xq.resize(kx);
  for (Eigen::Index a = 0; a < kx; ++a) ops.stiffness_xq(a) = d.sb.modes[a].k2;

  const XTables xt = tabulate_x(d);

  for (int j = 0; j < dim; ++j)
    for (int k = j + 1; k < dim; ++k) ops.omega_pairs.emplace_back(j, k);
  for (int j = 0; j < dim; ++j)
    for (int k = j; k < dim; ++k) ops.sigma_pairs.emplace_back(j, k);

  ops.A.assign(ku, MatrixXd());
  ops.Tx.assign(ku, MatrixXd());
  ops.Wx.assign(ku, std::vector<MatrixXd>(ops.omega_pairs.size()));
  ops.Ws.assign(ku, std::vector<MatrixXd>(ops.sigma_pairs.size()));
  parallel_for(ops.ku, [&](std::size_t b, std::size_t e) {
    for (std::size_t ii = b; ii < e; ++ii) {
      const Eigen::Index i = static_cast<Eigen::Index>(ii);
      MatrixXd A = MatrixXd::Zero(ku, ku);
      for (int c = 0; c < dim; ++c) {
        MatrixXd adv = MatrixXd::Zero(ku, xt.X.cols());
        for (int m = 0; m < dim; ++m)
          adv += (xt.Hg[c][m].array().rowwise() * xt.H[m].row(i).array()).matrix();
        A += adv * xt.H[c].transpose();
      }
      ops.A[ii] = xt.w * A;

      MatrixXd dX = MatrixXd::Zero(kx, xt.X.cols());
      for (int l = 0; l < dim; ++l)
        dX += (xt.Xg[l].array().rowwise() * xt.H[l].row(i).array()).matrix();
      ops.Tx[ii] = xt.w * xt.X * dX.transpose();

      for (std::size_t c = 0; c < ops.omega_pairs.size(); ++c) {
        const auto [j, k] = ops.omega_pairs[c];
        const Eigen::RowVectorXd om = 0.5 * (xt.Hg[j][k].row(i) - xt.Hg[k][j].row(i));
        ops.Wx[ii][c] = xt.w * (xt.X.array().rowwise() * om.array()).matrix() * xt.X.transpose();
      }
      for (std::size_t c = 0; c < ops.sigma_pairs.size(); ++c) {
        const auto [j, k] = ops.sigma_pairs[c];
        const Eigen::RowVectorXd sg = 0.5 * (xt.Hg[j][k].row(i) + xt.Hg[k][j].row(i));
        ops.Ws[ii][c] = xt.w * (xt.X.array().rowwise() * sg.array()).matrix() * xt.X.transpose();
      }
    }
  });

  // configuration side
  const auto& cb = d.cb;
  const Eigen::Index nn = static_cast<Eigen::Index>(d.quad.size());
  const Eigen::Index kq = static_cast<Eigen::Index>(ops.kq);
  const Eigen::Map<const VectorXd> mw(d.quad.mw.data(), nn);
  const Eigen::Map<const VectorXd> uf(d.quad.force_factor.data(), nn);

  ops.stiffness_q = MatrixXd::Zero(kq, kq);
  for (int j = 0; j < dim; ++j) ops.stiffness_q += cb.grads[j] * mw.asDiagonal() * cb.grads[j].transpose();
  require_finite(ops.stiffness_q, "stiffness_q");

  const auto P = q_rotation_blocks(d);
  for (const auto& [j, k] : ops.omega_pairs) ops.Rq.push_back(P[j][k] - P[k][j]);
  for (const auto& [j, k] : ops.sigma_pairs) ops.Sq.push_back(j == k ? P[j][j] : MatrixXd(P[j][k] + P[k][j]));

  ops.Cq.assign(kq, MatrixXd::Zero(dim, dim));
  double cb2 = 0.0;
  for (Eigen::Index n = 0; n < nn; ++n) {
    const VectorXd q = d.quad.nodes.row(n).transpose();
    const MatrixXd Fq = uf(n) * q * q.transpose();
    for (Eigen::Index m = 0; m < kq; ++m) ops.Cq[m] += (mw(n) * cb.values(m, n)) * Fq;
    cb2 += mw(n) * Fq.squaredNorm();
  }
  for (const auto& C : ops.Cq) require_finite(C, "Kramers moments");
  if (!std::isfinite(cb2)) throw std::runtime_error("assembly: stress constant diverged");
  ops.Cb = std::sqrt(cb2);

  // Ex[j][k](a, l) = int X_a d_k (h_l)_j
  std::vector<std::vector<MatrixXd>> Ex(dim, std::vector<MatrixXd>(dim));
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) Ex[j][k] = xt.w * xt.X * xt.Hg[j][k].transpose();
  const double g = d.model.gamma_c;
  ops.S.assign(ku, MatrixXd::Zero(kx, kq));
  for (Eigen::Index l = 0; l < ku; ++l)
    for (Eigen::Index m = 0; m < kq; ++m)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) ops.S[l].col(m) += (g * ops.Cq[m](j, k)) * Ex[j][k].col(l);
  return ops;
}

Eigen::MatrixXd AssembledOperators::transport_matrix(std::size_t i) const {
  const Eigen::Index N = static_cast<Eigen::Index>(kx * kq);
  MatrixXd out = MatrixXd::Zero(N, N);
  kron_add(1.0, Tx[i], MatrixXd::Identity(kq, kq), out);
  return out;
}

Eigen::MatrixXd AssembledOperators::rotation_matrix(std::size_t i) const {
  const Eigen::Index N = static_cast<Eigen::Index>(kx * kq);
  MatrixXd out = MatrixXd::Zero(N, N);
  for (std::size_t c = 0; c < Rq.size(); ++c) kron_add(-1.0, Wx[i][c], Rq[c], out);
  return out;
}

Eigen::MatrixXd rotation_matrix_by_parts(const Discretization& d, std::size_t i) {
  const int dim = d.model.dim;
  const XTables xt = tabulate_x(d);
  const Eigen::Index kx = static_cast<Eigen::Index>(d.kx()), kq = static_cast<Eigen::Index>(d.kq());
  const auto ii = static_cast<Eigen::Index>(i);
  // Px[j][k](a, b) = int h_j d_k (X_a X_b)
  std::vector<std::vector<MatrixXd>> Px(dim, std::vector<MatrixXd>(dim));
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      const MatrixXd hg = (xt.Xg[k].array().rowwise() * xt.H[j].row(ii).array()).matrix();
      const MatrixXd hX = (xt.X.array().rowwise() * xt.H[j].row(ii).array()).matrix();
      Px[j][k] = xt.w * (hg * xt.X.transpose() + hX * xt.Xg[k].transpose());
    }
  const auto P = q_rotation_blocks(d);
  MatrixXd out = MatrixXd::Zero(kx * kq, kx * kq);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      kron_add(0.5, Px[j][k], P[j][k], out);
      kron_add(-0.5, Px[k][j], P[j][k], out);
    }
  return out;
}

Eigen::MatrixXd apply_transport_rotation(const AssembledOperators& ops, const Eigen::VectorXd& u,
                                         const Eigen::MatrixXd& V) {
  const Eigen::Index kx = static_cast<Eigen::Index>(ops.kx);
  MatrixXd Tsum = MatrixXd::Zero(kx, kx);
  std::vector<MatrixXd> Wsum(ops.Rq.size(), MatrixXd::Zero(kx, kx));
  for (std::size_t i = 0; i < ops.ku; ++i) {
    const double ui = u(static_cast<Eigen::Index>(i));
    if (ui == 0.0) continue;
    Tsum += ui * ops.Tx[i];
    for (std::size_t c = 0; c < ops.Rq.size(); ++c) Wsum[c] += ui * ops.Wx[i][c];
  }
  MatrixXd out = Tsum * V;
  for (std::size_t c = 0; c < ops.Rq.size(); ++c) out -= Wsum[c] * V * ops.Rq[c].transpose();
  return out;
}

Eigen::MatrixXd apply_stretching(const AssembledOperators& ops, const Eigen::VectorXd& u,
                                 const Eigen::MatrixXd& V) {
  MatrixXd out = MatrixXd::Zero(V.rows(), V.cols());
  for (std::size_t i = 0; i < ops.ku; ++i) {
    const double ui = u(static_cast<Eigen::Index>(i));
    if (ui == 0.0) continue;
    for (std::size_t c = 0; c < ops.Sq.size(); ++c)
      out -= ui * ops.Ws[i][c] * V * ops.Sq[c].transpose();
  }
  return out;
}

Eigen::VectorXd advection(const AssembledOperators& ops, const Eigen::VectorXd& u) {
  VectorXd B = VectorXd::Zero(static_cast<Eigen::Index>(ops.ku));
  for (std::size_t i = 0; i < ops.ku; ++i) {
    const double ui = u(static_cast<Eigen::Index>(i));
    if (ui != 0.0) B += ui * (ops.A[i].transpose() * u);
  }
  return B;
}

Eigen::VectorXd stress_forcing(const AssembledOperators& ops, const Eigen::MatrixXd& psi) {
  VectorXd s(static_cast<Eigen::Index>(ops.ku));
  for (std::size_t l = 0; l < ops.ku; ++l)
    s(static_cast<Eigen::Index>(l)) = ops.S[l].cwiseProduct(psi).sum();
  return s;
}

}  // namespace fnsfp
