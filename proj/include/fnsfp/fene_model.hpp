#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fnsfp {

// Free is the zero spring; only the Monte-Carlo module accepts it since it
// has no normalizable Maxwellian.
enum class SpringKind { Hookean, FENE, Free };

struct SpringModel {
  SpringKind kind = SpringKind::FENE;
  double b = 10.0;  // FENE only, squared maximal extension
};

constexpr double kHookeanRadius = 6.0;

struct PhysicalParams {
  double zeta;       // drag [kg/s]
  double H;          // spring constant [kg/s^2]
  double k_B_mu_T;   // thermal energy [J]
  double rho;        // density [kg/m^3]
  double eta;        // viscosity [kg/(m s)]
  double N;          // polymer count
  double L0;         // length scale [m]
  double U0;         // velocity scale [m/s]
};

struct ModelParams {
  double alpha = 0.75;
  double Re = 10.0;
  double lambda = 0.5;
  double eps = 0.05;
  double gamma_c = 0.5;
  SpringModel spring;
  int dim = 2;

  double nu() const { return 1.0 / Re; }
};

void validate(const SpringModel& s);
void validate(const ModelParams& m);

// Squared radius of the configuration domain: b for FENE, the truncation
// radius squared for Hookean.
double domain_radius_sq(const SpringModel& s);
bool admissible(const SpringModel& s, const Eigen::VectorXd& q);

double potential(const SpringModel& s, double x);
double potential_derivative(const SpringModel& s, double x);  // U'(x)
Eigen::VectorXd spring_force(const SpringModel& s, const Eigen::VectorXd& q);

// e^{-U(|q|^2/2)} without the normalizer
double maxwellian_unnormalized(const SpringModel& s, const Eigen::VectorXd& q);
// Normalizer over D from a high-order configuration quadrature (cached).
double maxwellian_normalizer(const SpringModel& s, int dim);
double maxwellian(const SpringModel& s, const Eigen::VectorXd& q, int dim);

struct VorticitySplit {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd omega;
};
VorticitySplit vorticity_split(const Eigen::MatrixXd& grad_u);

struct Scales {
  double ell0;  // sqrt(k_B mu_T / H)
  double T0;    // L0 / U0
};
Scales scales(const PhysicalParams& p);
void validate(const PhysicalParams& p);

// Spring and dim are carried over from `base`; the five groups are derived.
ModelParams nondimensionalize(const PhysicalParams& p, double alpha,
                              const ModelParams& base = ModelParams{});

}  // namespace fnsfp
