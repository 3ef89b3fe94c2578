#include "fnsfp/fene_model.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "fnsfp/quadrature.hpp"

namespace fnsfp {

void validate(const SpringModel& s) {
  if (s.kind == SpringKind::FENE && !(s.b > 2.0))
    throw std::invalid_argument("FENE requires b > 2 so that M |F|^2 |q|^2 is integrable, got b = " +
                                std::to_string(s.b));
}

void validate(const ModelParams& m) {
  if (!(m.alpha > 0.5 && m.alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in (1/2, 1], got " + std::to_string(m.alpha));
  if (!(m.Re > 0.0)) throw std::invalid_argument("Re must be positive");
  if (!(m.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(m.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(m.gamma_c >= 0.0)) throw std::invalid_argument("gamma_c must be nonnegative");
  if (m.dim != 2 && m.dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (m.spring.kind == SpringKind::Free)
    throw std::invalid_argument("the free spring is only available to the Monte-Carlo module");
  validate(m.spring);
}

double domain_radius_sq(const SpringModel& s) {
  switch (s.kind) {
    case SpringKind::FENE: return s.b;
    case SpringKind::Hookean: return kHookeanRadius * kHookeanRadius;
    case SpringKind::Free: return INFINITY;
  }
  return INFINITY;
}

bool admissible(const SpringModel& s, const Eigen::VectorXd& q) {
  return s.kind != SpringKind::FENE || q.squaredNorm() < s.b;
}

double potential(const SpringModel& s, double x) {
  if (x < 0.0) throw std::domain_error("potential argument must be >= 0");
  switch (s.kind) {
    case SpringKind::Hookean: return x;
    case SpringKind::Free: return 0.0;
    case SpringKind::FENE:
      if (x >= s.b / 2.0) throw std::domain_error("FENE potential needs s < b/2");
      return -0.5 * s.b * std::log1p(-2.0 * x / s.b);
  }
  return 0.0;
}

double potential_derivative(const SpringModel& s, double x) {
  switch (s.kind) {
    case SpringKind::Hookean: return 1.0;
    case SpringKind::Free: return 0.0;
    case SpringKind::FENE:
      if (x >= s.b / 2.0) throw std::domain_error("FENE force needs |q|^2 < b");
      return 1.0 / (1.0 - 2.0 * x / s.b);
  }
  return 0.0;
}

Eigen::VectorXd spring_force(const SpringModel& s, const Eigen::VectorXd& q) {
  return potential_derivative(s, 0.5 * q.squaredNorm()) * q;
}

double maxwellian_unnormalized(const SpringModel& s, const Eigen::VectorXd& q) {
  const double r2 = q.squaredNorm();
  switch (s.kind) {
    case SpringKind::Hookean: return std::exp(-0.5 * r2);
    case SpringKind::FENE:
      if (r2 >= s.b) throw std::domain_error("FENE Maxwellian needs |q|^2 < b");
      return std::pow(1.0 - r2 / s.b, 0.5 * s.b);
    case SpringKind::Free: break;
  }
  throw std::domain_error("free spring has no Maxwellian");
}

double maxwellian_normalizer(const SpringModel& s, int dim) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(s.kind), s.b, dim);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double Z = make_config_quadrature(s, dim, 16).normalizer;
  cache.emplace(key, Z);
  return Z;
}

double maxwellian(const SpringModel& s, const Eigen::VectorXd& q, int dim) {
  if (s.kind == SpringKind::Hookean && q.squaredNorm() > kHookeanRadius * kHookeanRadius)
    return 0.0;
  return maxwellian_unnormalized(s, q) / maxwellian_normalizer(s, dim);
}

VorticitySplit vorticity_split(const Eigen::MatrixXd& G) {
  if (G.rows() != G.cols()) throw std::invalid_argument("velocity gradient must be square");
  return {0.5 * (G + G.transpose()), 0.5 * (G - G.transpose())};
}

void validate(const PhysicalParams& p) {
  const double v[] = {p.zeta, p.H, p.k_B_mu_T, p.rho, p.eta, p.N, p.L0, p.U0};
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("physical parameters must be strictly positive");
  if (p.N != std::floor(p.N)) throw std::invalid_argument("polymer count must be an integer");
}

Scales scales(const PhysicalParams& p) {
  validate(p);
  return {std::sqrt(p.k_B_mu_T / p.H), p.L0 / p.U0};
}

ModelParams nondimensionalize(const PhysicalParams& p, double alpha, const ModelParams& base) {
  const Scales sc = scales(p);
  ModelParams m = base;
  m.alpha = alpha;
  m.lambda = p.zeta / (4.0 * p.H * sc.T0);
  m.eps = p.k_B_mu_T / (2.0 * p.zeta * p.U0 * p.L0);
  m.gamma_c = p.k_B_mu_T * p.N / (p.rho * p.U0 * p.U0 * p.L0 * p.L0 * p.L0);
  m.Re = p.rho * p.U0 * p.L0 / p.eta;
  return m;
}

}  // namespace fnsfp
