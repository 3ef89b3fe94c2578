#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fnsfp/fene_model.hpp"

namespace fnsfp {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

// Golub-Welsch for the weight (1-x)^a (1+x)^b on [-1, 1].
Rule1D gauss_jacobi(int n, double a, double b);
inline Rule1D gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

// Configuration-space rule on D. w integrates against dq, mw against M dq
// with the Maxwellian normalized so that sum(mw) = 1.
struct ConfigQuadrature {
  SpringModel spring;
  int dim = 2;
  int exact_degree = 0;  // polynomial degree in q integrated exactly against M
  Eigen::MatrixXd nodes;  // n_nodes x dim
  std::vector<double> w;
  std::vector<double> mw;
  std::vector<double> force_factor;  // U'(|q|^2/2) at each node
  double normalizer = 1.0;

  std::size_t size() const { return w.size(); }
};

// Resolves M-weighted polynomial integrands up to `degree`; force and
// force-squared weighted integrands are exact for FENE as well.
ConfigQuadrature make_config_quadrature(const SpringModel& s, int dim, int degree);

void write_csv(std::ostream& os, const ConfigQuadrature& q);

// C(M psi_hat) = int_D F(q) q^T M psi_hat dq with M normalized.
Eigen::MatrixXd kramers_stress(const ConfigQuadrature& quad,
                               const std::function<double(const Eigen::VectorXd&)>& psi_hat);

// Uniform tensor grid on [0, 2pi)^dim; exact for trigonometric polynomials of
// degree < n per direction. Weights sum to 1 (normalized torus measure).
struct TorusGrid {
  int dim = 2;
  int n = 0;
  Eigen::MatrixXd points;  // n^dim x dim
  double weight = 0.0;
};
TorusGrid make_torus_grid(int dim, int n);

}  // namespace fnsfp
