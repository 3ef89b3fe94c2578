#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <vector>

#include "fnsfp/fene_model.hpp"

namespace fnsfp::mc {

// xoshiro256** with splitmix64 seeding; small state so every path can own a
// stream. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  double uniform();  // (0, 1)

 private:
  std::uint64_t s_[4];
};

struct SubordinatorParams {
  double alpha = 0.75;
  double tau0 = 1.0;
  double laplace_exponent(double lambda) const;
};
void validate(const SubordinatorParams& p);

// Totally skewed alpha-stable increment over operational time d_tau,
// E exp(-lambda X) = exp(-d_tau Phi(lambda)).
double sample_subordinator_increment(const SubordinatorParams& p, double d_tau, Rng& rng);

// S^{t_n} on the grid t_n = n dt, first passage resolved on the operational
// mesh op_step (default dt / 100).
std::vector<double> inverse_subordinator_path(const SubordinatorParams& p, double dt,
                                              std::size_t n_steps, Rng& rng,
                                              double op_step = 0.0);

// Frozen velocity: fills u(x) and grad u(x) with G(j, k) = d_k u_j.
using VelocityField =
    std::function<void(const double* x, double* u, double* G /* row-major dim x dim */)>;

struct DumbbellEnsemble {
  int dim = 2;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  std::vector<double> x, q;        // n_paths x dim
  std::vector<double> op_time;     // S^t per path
  std::vector<double> clock;       // U at op_time
  std::vector<double> pending;     // next sampled clock increment
  std::vector<std::uint8_t> flagged;
  std::vector<Rng> rng;
  std::vector<std::normal_distribution<double>> normal;  // keeps cached draws per path

  std::size_t n_flagged() const;
  const double* qp(std::size_t i) const { return q.data() + i * dim; }
  const double* xp(std::size_t i) const { return x.data() + i * dim; }
};

struct McParams {
  SubordinatorParams sub;
  double lambda = 0.5;
  double eps = 0.05;
  SpringModel spring;
  int dim = 2;
  double op_step = 1e-3;  // Euler-Maruyama step in operational time
  int max_retries = 100;
};
void validate(const McParams& p);

// x uniform on the torus; q from the Maxwellian reweighted by
// 1 + A (q1^2 - q2^2)/s_q (A = 0 for equilibrium).
DumbbellEnsemble make_ensemble(const McParams& p, std::size_t n_paths, std::uint64_t seed,
                               double anisotropy = 0.0);

// Advance every unflagged path to physical time t_new. Paths whose FENE
// rejection loop exhausts max_retries are flagged and frozen.
void advance_ensemble(DumbbellEnsemble& e, const McParams& p, double t_new,
                      const VelocityField& u = nullptr);

struct Histogram {
  std::vector<std::vector<double>> edges;  // per axis
  std::vector<double> mass;                // row-major over axes
  std::size_t n_bins() const { return mass.size(); }
};
Histogram make_histogram(const std::vector<std::vector<double>>& edges);
// Uniform bins: axes are x_1..x_dim (on [0, 2pi)) then q_1..q_dim on [-r, r].
Histogram empirical_density(const DumbbellEnsemble& e, int x_bins, int q_bins, double q_range);
Histogram q_marginal(const DumbbellEnsemble& e, int q_bins, double q_range);

void write_histogram_csv(std::ostream& os, const Histogram& h);
Histogram read_histogram_csv(std::istream& is);

}  // namespace fnsfp::mc
