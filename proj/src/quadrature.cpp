#include "fnsfp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fnsfp {

Rule1D gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (!(a > -1.0 && b > -1.0)) throw std::invalid_argument("Jacobi exponents must exceed -1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double m = 2.0 * k + ab;
    J(k, k) = k == 0 ? (b - a) / (ab + 2.0) : (b * b - a * a) / (m * (m + 2.0));
    if (k + 1 < n) {
      const double j = k + 1.0, mj = 2.0 * j + ab;
      double beta;
      if (j == 1.0)
        beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
      else
        beta = 4.0 * j * (j + a) * (j + b) * (j + ab) / (mj * mj * (mj + 1.0) * (mj - 1.0));
      J(k, k + 1) = J(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int k = 0; k < n; ++k) {
    r.x[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    r.w[k] = mu0 * v * v;
  }
  return r;
}

namespace {

// Unit directions with weights summing to the sphere area.
void angular_rule(int dim, int degree, std::vector<Eigen::VectorXd>& dirs,
                  std::vector<double>& wts) {
  const double two_pi = 2.0 * std::numbers::pi;
  const int nphi = std::max(8, degree + 4);
  if (dim == 2) {
    for (int j = 0; j < nphi; ++j) {
      const double th = two_pi * (j + 0.5) / nphi;
      Eigen::VectorXd d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
      wts.push_back(two_pi / nphi);
    }
    return;
  }
  const Rule1D gl = gauss_legendre(degree / 2 + 3);
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double c = gl.x[i], s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < nphi; ++j) {
      const double ph = two_pi * (j + 0.5) / nphi;
      Eigen::VectorXd d(3);
      d << s * std::cos(ph), s * std::sin(ph), c;
      dirs.push_back(d);
      wts.push_back(gl.w[i] * two_pi / nphi);
    }
  }
}

}  // namespace

ConfigQuadrature make_config_quadrature(const SpringModel& s, int dim, int degree) {
  validate(s);
  if (s.kind == SpringKind::Free) throw std::invalid_argument("free spring has no quadrature");
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  degree = std::max(degree, 2);
  ConfigQuadrature Q;
  Q.spring = s;
  Q.dim = dim;
  Q.exact_degree = degree;

  std::vector<Eigen::VectorXd> dirs;
  std::vector<double> aw;
  angular_rule(dim, degree, dirs, aw);

  std::vector<double> rad, rw, mfac;  // radius, dq radial weight, e^{-U}
  if (s.kind == SpringKind::FENE) {
    // s = r^2/b; dq = (b^{d/2}/2) s^{d/2-1} ds dOmega. The Jacobi exponent
    // b/2 - 2 leaves M, F M and |F|^2 M as polynomial multiples of the weight.
    const double aj = s.b / 2.0 - 2.0, bj = dim / 2.0 - 1.0;
    const int nr = degree / 2 + 6;
    const Rule1D gj = gauss_jacobi(nr, aj, bj);
    const double scale = std::pow(s.b, dim / 2.0) / 2.0 * std::pow(2.0, -aj - bj - 1.0);
    for (int i = 0; i < nr; ++i) {
      const double sv = 0.5 * (1.0 + gj.x[i]), om = 0.5 * (1.0 - gj.x[i]);
      rad.push_back(std::sqrt(s.b * sv));
      rw.push_back(scale * gj.w[i] * std::pow(om, -aj));
      mfac.push_back(scale * gj.w[i] * om * om);  // rw * (1-s)^{b/2}
    }
  } else {
    const int nr = 64 + degree;
    const Rule1D gl = gauss_legendre(nr);
    const double R = kHookeanRadius;
    for (int i = 0; i < nr; ++i) {
      const double r = 0.5 * R * (1.0 + gl.x[i]);
      rad.push_back(r);
      const double wr = 0.5 * R * gl.w[i] * std::pow(r, dim - 1);
      rw.push_back(wr);
      mfac.push_back(wr * std::exp(-0.5 * r * r));
    }
  }

  const std::size_t n = rad.size() * dirs.size();
  Q.nodes.resize(static_cast<Eigen::Index>(n), dim);
  Q.w.resize(n);
  Q.mw.resize(n);
  Q.force_factor.resize(n);
  double Z = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < rad.size(); ++i)
    for (std::size_t j = 0; j < dirs.size(); ++j, ++k) {
      Q.nodes.row(static_cast<Eigen::Index>(k)) = rad[i] * dirs[j].transpose();
      Q.w[k] = rw[i] * aw[j];
      Q.mw[k] = mfac[i] * aw[j];
      Q.force_factor[k] = potential_derivative(s, 0.5 * rad[i] * rad[i]);
      Z += Q.mw[k];
    }
  for (double& m : Q.mw) m /= Z;
  Q.normalizer = Z;
  return Q;
}

void write_csv(std::ostream& os, const ConfigQuadrature& q) {
  os.precision(17);
  for (int c = 0; c < q.dim; ++c) os << "q" << c + 1 << ",";
  os << "weight,maxwellian_weight\n";
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (int c = 0; c < q.dim; ++c) os << q.nodes(static_cast<Eigen::Index>(k), c) << ",";
    os << q.w[k] << "," << q.mw[k] << "\n";
  }
}

TorusGrid make_torus_grid(int dim, int n) {
  if (n < 1) throw std::invalid_argument("torus grid needs n >= 1");
  TorusGrid g;
  g.dim = dim;
  g.n = n;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
  g.points.resize(static_cast<Eigen::Index>(total), dim);
  g.weight = 1.0 / static_cast<double>(total);
  const double h = 2.0 * std::numbers::pi / n;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    for (int d = 0; d < dim; ++d) {
      g.points(static_cast<Eigen::Index>(k), d) = h * static_cast<double>(r % n);
      r /= n;
    }
  }
  return g;
}

Eigen::MatrixXd kramers_stress(const ConfigQuadrature& quad,
                               const std::function<double(const Eigen::VectorXd&)>& psi_hat) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(quad.dim, quad.dim);
  for (std::size_t n = 0; n < quad.size(); ++n) {
    const Eigen::VectorXd q = quad.nodes.row(static_cast<Eigen::Index>(n)).transpose();
    C += (quad.mw[n] * quad.force_factor[n] * psi_hat(q)) * (q * q.transpose());
  }
  if (!C.allFinite()) throw std::runtime_error("Kramers integral diverged");
  return C;
}

}  // namespace fnsfp
