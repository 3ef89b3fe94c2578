#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fnsfp::fk {

struct FractionalOrder {
  double alpha;
  explicit FractionalOrder(double a);
};

struct TimeGrid {
  double dt;
  std::size_t n_steps;
  TimeGrid(double dt, std::size_t n_steps);
  double t(std::size_t n) const { return dt * static_cast<double>(n); }
  double t_final() const { return t(n_steps); }
};

enum class Scheme { GrunwaldLetnikov, ProductRectangle };

struct KernelWeights {
  double order;
  double dt;
  std::vector<double> weights;
  Scheme scheme;
};

// values is row-major, (n_steps + 1) x dim. Paths singular at t = 0 may
// leave values[0] unset; only product-rectangle operations ignore it.
struct SampledPath {
  TimeGrid grid;
  std::size_t dim;
  std::vector<double> values;

  SampledPath(TimeGrid g, std::size_t dim);
  std::size_t size() const { return grid.n_steps + 1; }
  double* at(std::size_t n) { return values.data() + n * dim; }
  const double* at(std::size_t n) const { return values.data() + n * dim; }
};

double kernel_eval(double order, double t);

// GL recursion for any order >= 0; order 0 gives (1, 0, 0, ...).
std::vector<double> gl_weights(double order, std::size_t n);
// W[i] = int_{i dt}^{(i+1) dt} g_order(s) ds
std::vector<double> pr_weights(double order, double dt, std::size_t n);

KernelWeights make_weights(FractionalOrder order, const TimeGrid& grid, Scheme scheme);

// g_order * path, right-endpoint product rectangle rule. output[0] = 0.
SampledPath fractional_convolve(double order, const SampledPath& path);

// Scheme::GrunwaldLetnikov needs a finite path(0). Scheme::ProductRectangle
// differentiates g_{1-alpha} * path with the extrapolated trace at t = 0 and
// never reads path(0).
SampledPath rl_derivative(FractionalOrder order, const SampledPath& path,
                          Scheme scheme = Scheme::GrunwaldLetnikov);

// (g_order * path)(0+) from the first four grid values, polynomial
// extrapolation to t = 0.
std::vector<double> convolution_trace(double order, const SampledPath& path);

// Neville extrapolation of (t_i, y_i) to t = 0.
double extrapolate_to_zero(const double* t, const double* y, std::size_t k);

// max over grid points with t >= t_cut of
// |(g_a * d^a path)(t) - path(t) + (g_{1-a} * path)(0) g_a(t)|
double deconvolution_residual(FractionalOrder order, const SampledPath& path,
                              double t_cut = 0.0);

// Per-step (u, d^a u) - 1/2 d^a |u|^2 - 1/2 k_n |u|^2 where k_n is the GL
// derivative of the unit path (the discrete stand-in for g_{1-a}(t_n)).
std::vector<double> chain_inequality_gap(FractionalOrder order, const SampledPath& path);
double fraction_at_least(const std::vector<double>& gaps, double tol);

struct IdentityResidual {
  std::string name;
  double alpha;
  double dt;
  double residual;
};

// Semigroup, deconvolution and monomial derivative identities, residuals
// measured on [t_cut, T].
std::vector<IdentityResidual> identity_suite(const std::vector<double>& alphas,
                                             const std::vector<double>& dts, double T = 1.0,
                                             double t_cut = 0.1);

}  // namespace fnsfp::fk
