#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fnsfp/config.hpp"
#include "fnsfp/diagnostics.hpp"
#include "fnsfp/langevin_mc.hpp"

namespace fnsfp {

struct CliOptions {
  std::string config;
  std::string out;  // overrides output.dir
  std::optional<std::uint64_t> seed;
  std::size_t halt_after = 0;  // run: stop after this many steps, checkpoint kept
  // mc overrides
  std::optional<std::size_t> n_paths;
  std::optional<double> alpha;
  std::optional<std::string> spring;
  std::string histogram;
  // verify / compare-mc inputs
  std::string trajectory;
  std::string solver_csv, mc_csv;
  double tv_tol = 0.05;
};

// Exit codes: 0 all checks pass, 1 a check failed, 2 runtime error.
int orchestrate(const std::string& subcommand, const CliOptions& opt, std::ostream& log,
                std::ostream& err);

struct Check {
  std::string name;
  bool pass = true;
  double value = 0.0, limit = 0.0;
  std::string note;
};

// Post-run checks over a full trajectory. Records are one per step.
std::vector<Check> verify_state(const Discretization& d, const SpectralState& s, double dt, double T,
                                const std::vector<DiagnosticRecord>& recs);

// u(x) and grad u(x) from Galerkin coefficients.
mc::VelocityField galerkin_velocity(const Discretization& d, const Eigen::VectorXd& u);

mc::McParams mc_params(const RunConfig& c);

InitialData load_initial(const RunConfig& c, const Discretization& d);

}  // namespace fnsfp
