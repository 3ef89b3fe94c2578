#include <filesystem>
#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fnsfp/io.hpp"

namespace fnsfp {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_trajectory_csv(std::ostream& os, const SpectralState& s, double dt) {
  const std::size_t ku = static_cast<std::size_t>(s.u.size());
  const std::size_t kx = static_cast<std::size_t>(s.psi.rows()), kq = static_cast<std::size_t>(s.psi.cols());
  const std::size_t N = kx * kq;
  os << "step,t";
  for (std::size_t i = 0; i < ku; ++i) os << ",u_" << i;
  for (const char* f : {"psi", "phi"})
    for (std::size_t a = 0; a < kx; ++a)
      for (std::size_t m = 0; m < kq; ++m) os << ',' << f << '_' << a << '_' << m;
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t n = 0; n <= s.step; ++n) {
    os << n << ',' << dt * static_cast<double>(n);
    for (std::size_t i = 0; i < ku; ++i) os << ',' << s.u_hist[n * ku + i];
    for (std::size_t k = 0; k < N; ++k) os << ',' << s.psi_hist[n * N + k];
    for (std::size_t k = 0; k < N; ++k) os << ',' << s.phi_hist[n * N + k];
    os << '\n';
  }
  os.precision(old);
}

SpectralState read_trajectory_csv(std::istream& is, std::size_t ku, std::size_t kx, std::size_t kq) {
  const std::size_t N = kx * kq, cols = 2 + ku + 2 * N;
  std::string line;
  if (!std::getline(is, line) || line.rfind("step,t", 0) != 0)
    throw std::runtime_error("trajectory: missing header");
  if (static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1 != cols)
    throw std::runtime_error("trajectory: column count does not match the basis sizes");
  SpectralState s;
  std::vector<double> row(cols);
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= cols) throw std::runtime_error("trajectory: too many columns in row " + std::to_string(n));
      row[c++] = std::stod(cell);
    }
    if (c != cols) throw std::runtime_error("trajectory: short row " + std::to_string(n));
    if (static_cast<std::size_t>(row[0]) != n) throw std::runtime_error("trajectory: steps out of order");
    s.u_hist.insert(s.u_hist.end(), row.begin() + 2, row.begin() + 2 + static_cast<long>(ku));
    s.psi_hist.insert(s.psi_hist.end(), row.begin() + 2 + static_cast<long>(ku),
                      row.begin() + 2 + static_cast<long>(ku + N));
    s.phi_hist.insert(s.phi_hist.end(), row.begin() + 2 + static_cast<long>(ku + N), row.end());
    s.t = row[1];
    ++n;
  }
  if (n == 0) throw std::runtime_error("trajectory: no rows");
  s.step = n - 1;
  const auto last = [&](const std::vector<double>& h) {
    return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(h.data() + s.step * N, static_cast<Eigen::Index>(kq),
                                                             static_cast<Eigen::Index>(kx))
                               .transpose());
  };
  s.u = Eigen::Map<const Eigen::VectorXd>(s.u_hist.data() + s.step * ku, static_cast<Eigen::Index>(ku));
  s.psi = last(s.psi_hist);
  s.phi = last(s.phi_hist);
  return s;
}

}  // namespace fnsfp
