#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fnsfp/fene_model.hpp"
#include "fnsfp/galerkin.hpp"

namespace fnsfp {

struct McConfig {
  std::size_t n_paths = 100000;
  double t_final = 1.0;
  double op_step = 1e-3;
  double tau0 = 1.0;
  double anisotropy = 0.0;
  bool frozen_velocity = true;  // drive paths with the initial velocity field
  int q_bins = 12;
  double q_range = 0.0;  // 0: sqrt(b) for FENE, 3 for Hookean
};

struct RunConfig {
  ModelParams model;
  std::optional<PhysicalParams> physical;  // when set, Re/lambda/eps/gamma_c are derived
  double dt = 5e-3;
  std::size_t n_steps = 200;
  double horizon = 0.0;  // 0: dt * n_steps
  int n_modes_x = 2;
  int n_modes_q = 15;
  InitialSpec initial;
  std::string coefficient_file;  // overrides the preset when non-empty
  SolverOptions solver;
  std::uint64_t seed = 20240611;
  std::string out_dir = "out";
  std::size_t stride = 1;
  std::size_t checkpoint_every = 50;
  McConfig mc;

  double T() const { return horizon > 0.0 ? horizon : dt * static_cast<double>(n_steps); }
};

// INI text with one level of sections. Unknown sections or keys, malformed
// values and out-of-range values throw ConfigError naming the key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative paths in the text are resolved against base_dir.
RunConfig parse_config(const std::string& text, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& c);

// Reads "field,i,j,value" rows (field u with j = 0, or psi).
InitialData read_coefficients(const std::string& path, const Discretization& d);
void write_coefficients(const std::string& path, const InitialData& data);

}  // namespace fnsfp
