#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fnsfp/fene_model.hpp"
#include "fnsfp/quadrature.hpp"

namespace fnsfp {

constexpr int kMaxVelocityModes = 64;
constexpr int kMaxConfigModes = 64;

// Wavevectors 0 < |k| <= shell, one representative per +-k pair, ordered by
// |k|^2 then lexicographically.
std::vector<Eigen::VectorXi> half_lattice(int dim, int shell);

// sqrt(2) e cos(k.x) and sqrt(2) e sin(k.x) with e orthogonal to k,
// orthonormal for the normalized measure on [0, 2pi)^dim.
struct VelocityMode {
  Eigen::VectorXi k;
  Eigen::VectorXd e;
  bool is_sin = false;
  double k2 = 0.0;
};

struct VelocityBasis {
  int dim = 2;
  int shell = 1;
  std::vector<VelocityMode> modes;

  std::size_t size() const { return modes.size(); }
  Eigen::VectorXd value(std::size_t i, const Eigen::VectorXd& x) const;
  Eigen::MatrixXd gradient(std::size_t i, const Eigen::VectorXd& x) const;  // (j,l) = d_l h_j
};

VelocityBasis build_velocity_basis(int dim, int n_modes_x);

// Scalar x-modes for the density: 1, sqrt(2) cos(k.x), sqrt(2) sin(k.x).
struct ScalarMode {
  Eigen::VectorXi k;
  int kind = 0;  // 0 constant, 1 cos, 2 sin
  double k2 = 0.0;
};

struct ScalarBasis {
  int dim = 2;
  std::vector<ScalarMode> modes;

  std::size_t size() const { return modes.size(); }
  double value(std::size_t a, const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(std::size_t a, const Eigen::VectorXd& x) const;
  double sup_norm(std::size_t a) const { return modes[a].kind == 0 ? 1.0 : std::sqrt(2.0); }
};

ScalarBasis build_scalar_basis(int dim, int shell);

// M-orthonormal polynomials. In 2-D the candidates are r^{2n} Re/Im (q1 + i q2)^m
// ordered by degree 2n + m; in 3-D graded monomials. Gram-Schmidt in L^2_M.
struct ConfigCandidate {
  int n = 0, m = 0;     // 2-D radial and angular index
  bool is_sin = false;
  Eigen::VectorXi pw;   // 3-D monomial exponents
  int degree = 0;
};

struct ConfigBasis {
  SpringModel spring;
  int dim = 2;
  int max_degree = 0;
  std::vector<ConfigCandidate> candidates;
  Eigen::MatrixXd T;  // modes x candidates

  // node tables for the quadrature the basis was built with
  Eigen::MatrixXd values;              // modes x nodes
  std::vector<Eigen::MatrixXd> grads;  // per direction, modes x nodes

  std::size_t size() const { return candidates.size(); }
  Eigen::VectorXd eval(const Eigen::VectorXd& q) const;                 // all modes
  Eigen::MatrixXd eval_gradient(const Eigen::VectorXd& q) const;         // modes x dim
};

// Degree of the highest candidate among the first n modes.
int config_basis_degree(int dim, int n_modes_q);
ConfigBasis build_config_basis(const SpringModel& s, int dim, int n_modes_q,
                               const ConfigQuadrature& quad);

}  // namespace fnsfp
