#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fnsfp/galerkin.hpp"

namespace fnsfp {

// Writes content to path through a temporary sibling and a rename.
void write_atomic(const std::string& path, const std::string& content);

// step, t, u_i..., psi_a_m..., phi_a_m... for every stored level.
void write_trajectory_csv(std::ostream& os, const SpectralState& s, double dt);
// Rebuilds a state with full history; sizes must match kx x kq and ku.
SpectralState read_trajectory_csv(std::istream& is, std::size_t ku, std::size_t kx, std::size_t kq);

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 14695981039346656037ull);

struct CheckpointHeader {
  int version = 1;
  ModelParams model;
  std::size_t ku = 0, kx = 0, kq = 0;
  int n_modes_x = 0, n_modes_q = 0;
  double dt = 0.0;
  std::size_t n_steps = 0;  // configured horizon in steps
  std::size_t step = 0;
  std::uint64_t gl_hash = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t payload_checksum = 0;
  std::size_t payload_bytes = 0;
};

// Magic line, one JSON header line, then the binary payload (u, psi, phi,
// histories). Written atomically.
void save_checkpoint(const std::string& path, CheckpointHeader h, const SpectralState& s);
// Throws std::runtime_error on a bad magic, header, size or checksum.
SpectralState load_checkpoint(const std::string& path, CheckpointHeader& h);

std::uint64_t gl_hash(const std::vector<double>& w);

}  // namespace fnsfp
