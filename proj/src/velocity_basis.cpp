#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fnsfp/bases.hpp"

namespace fnsfp {

std::vector<Eigen::VectorXi> half_lattice(int dim, int shell) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (shell < 1) throw std::invalid_argument("wavenumber shell must be >= 1");
  std::vector<Eigen::VectorXi> out;
  const int K = shell, K2 = shell * shell;
  Eigen::VectorXi k(dim);
  const int span = 2 * K + 1;
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= span;
  for (int idx = 0; idx < total; ++idx) {
    int r = idx;
    for (int d = 0; d < dim; ++d) {
      k(d) = r % span - K;
      r /= span;
    }
    const int n2 = k.squaredNorm();
    if (n2 == 0 || n2 > K2) continue;
    int first = 0;
    for (int d = 0; d < dim && first == 0; ++d) first = k(d);
    if (first > 0) out.push_back(k);
  }
  std::sort(out.begin(), out.end(), [](const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
    const int na = a.squaredNorm(), nb = b.squaredNorm();
    if (na != nb) return na < nb;
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  });
  return out;
}

namespace {

std::vector<Eigen::VectorXd> polarizations(const Eigen::VectorXi& k) {
  const Eigen::VectorXd kd = k.cast<double>();
  if (k.size() == 2) {
    Eigen::VectorXd e(2);
    e << -kd(1), kd(0);
    return {e.normalized()};
  }
  Eigen::Vector3d k3 = kd;
  Eigen::Vector3d axis(0, 0, 1);
  if (std::abs(k3.normalized().dot(axis)) > 0.9) axis = Eigen::Vector3d(1, 0, 0);
  const Eigen::Vector3d e1 = k3.cross(axis).normalized();
  const Eigen::Vector3d e2 = k3.cross(e1).normalized();
  return {Eigen::VectorXd(e1), Eigen::VectorXd(e2)};
}

}  // namespace

VelocityBasis build_velocity_basis(int dim, int n_modes_x) {
  VelocityBasis vb;
  vb.dim = dim;
  vb.shell = n_modes_x;
  for (const auto& k : half_lattice(dim, n_modes_x))
    for (const auto& e : polarizations(k))
      for (bool s : {false, true}) vb.modes.push_back({k, e, s, double(k.squaredNorm())});
  if (vb.size() > static_cast<std::size_t>(kMaxVelocityModes))
    throw std::invalid_argument("velocity basis has " + std::to_string(vb.size()) +
                                " modes, limit is " + std::to_string(kMaxVelocityModes));
  return vb;
}

Eigen::VectorXd VelocityBasis::value(std::size_t i, const Eigen::VectorXd& x) const {
  const auto& m = modes[i];
  const double ph = m.k.cast<double>().dot(x);
  return std::sqrt(2.0) * (m.is_sin ? std::sin(ph) : std::cos(ph)) * m.e;
}

Eigen::MatrixXd VelocityBasis::gradient(std::size_t i, const Eigen::VectorXd& x) const {
  const auto& m = modes[i];
  const Eigen::VectorXd kd = m.k.cast<double>();
  const double ph = kd.dot(x);
  const double d = std::sqrt(2.0) * (m.is_sin ? std::cos(ph) : -std::sin(ph));
  return d * m.e * kd.transpose();
}

ScalarBasis build_scalar_basis(int dim, int shell) {
  ScalarBasis sb;
  sb.dim = dim;
  sb.modes.push_back({Eigen::VectorXi::Zero(dim), 0, 0.0});
  for (const auto& k : half_lattice(dim, shell)) {
    sb.modes.push_back({k, 1, double(k.squaredNorm())});
    sb.modes.push_back({k, 2, double(k.squaredNorm())});
  }
  return sb;
}

double ScalarBasis::value(std::size_t a, const Eigen::VectorXd& x) const {
  const auto& m = modes[a];
  if (m.kind == 0) return 1.0;
  const double ph = m.k.cast<double>().dot(x);
  return std::sqrt(2.0) * (m.kind == 2 ? std::sin(ph) : std::cos(ph));
}

Eigen::VectorXd ScalarBasis::gradient(std::size_t a, const Eigen::VectorXd& x) const {
  const auto& m = modes[a];
  if (m.kind == 0) return Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd kd = m.k.cast<double>();
  const double ph = kd.dot(x);
  return std::sqrt(2.0) * (m.kind == 2 ? std::cos(ph) : -std::sin(ph)) * kd;
}

}  // namespace fnsfp
