#include "fnsfp/langevin_mc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fnsfp/parallel.hpp"

namespace fnsfp::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t& z) {
  z += 0x9E3779B97F4A7C15ull;
  std::uint64_t r = z;
  r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ull;
  r = (r ^ (r >> 27)) * 0x94D049BB133111EBull;
  return r ^ (r >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed;
  const std::uint64_t mix = splitmix64(z) ^ (stream * 0xD1B54A32D192ED03ull);
  z = mix;
  for (auto& s : s_) s = splitmix64(z);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t r = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return r;
}

double Rng::uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

double SubordinatorParams::laplace_exponent(double lambda) const {
  return std::pow(tau0, alpha - 1.0) * std::pow(lambda, alpha);
}

void validate(const SubordinatorParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0))
    throw std::invalid_argument("subordinator alpha must lie in (0, 1]");
  if (!(p.tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
}

// Kanter's representation of the one-sided stable law with E e^{-lS} = e^{-l^a}.
double sample_subordinator_increment(const SubordinatorParams& p, double d_tau, Rng& rng) {
  if (!(d_tau > 0.0)) throw std::invalid_argument("d_tau must be positive");
  const double a = p.alpha;
  if (a == 1.0) return d_tau;
  const double U = std::numbers::pi * rng.uniform();
  const double E = -std::log(rng.uniform());
  const double S = std::sin(a * U) / std::pow(std::sin(U), 1.0 / a) *
                   std::pow(std::sin((1.0 - a) * U) / E, (1.0 - a) / a);
  return std::pow(d_tau * std::pow(p.tau0, a - 1.0), 1.0 / a) * S;
}

std::vector<double> inverse_subordinator_path(const SubordinatorParams& p, double dt,
                                              std::size_t n_steps, Rng& rng, double op_step) {
  validate(p);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  std::vector<double> S(n_steps + 1, 0.0);
  if (p.alpha == 1.0) {
    for (std::size_t n = 0; n <= n_steps; ++n) S[n] = dt * static_cast<double>(n);
    return S;
  }
  const double h = op_step > 0.0 ? op_step : dt / 100.0;
  double tau = 0.0, U = 0.0, P = sample_subordinator_increment(p, h, rng);
  std::size_t k = 0;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t = dt * static_cast<double>(n);
    while (U + P <= t) {
      U += P;
      ++k;
      P = sample_subordinator_increment(p, h, rng);
    }
    tau = h * static_cast<double>(k);
    S[n] = tau;
  }
  return S;
}

std::size_t DumbbellEnsemble::n_flagged() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));
}

void validate(const McParams& p) {
  validate(p.sub);
  if (!(p.lambda > 0.0) || !(p.eps > 0.0)) throw std::invalid_argument("lambda and eps must be positive");
  if (p.dim != 2 && p.dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (!(p.op_step > 0.0)) throw std::invalid_argument("op_step must be positive");
  validate(p.spring);
}

namespace {

double force_factor(const SpringModel& s, double r2) {
  switch (s.kind) {
    case SpringKind::Hookean: return 1.0;
    case SpringKind::FENE: return 1.0 / (1.0 - r2 / s.b);
    case SpringKind::Free: return 0.0;
  }
  return 0.0;
}

double range_sq(const SpringModel& s) {
  return s.kind == SpringKind::Free ? INFINITY : domain_radius_sq(s);
}

void sample_equilibrium(const McParams& p, Rng& rng, std::normal_distribution<double>& N,
                        double* q) {
  const int d = p.dim;
  if (p.spring.kind == SpringKind::Free) {
    for (int k = 0; k < d; ++k) q[k] = 0.0;
    return;
  }
  if (p.spring.kind == SpringKind::Hookean) {
    const double R2 = range_sq(p.spring);
    double r2;
    do {
      r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        q[k] = N(rng);
        r2 += q[k] * q[k];
      }
    } while (r2 >= R2);
    return;
  }
  // |q|^2 / b ~ Beta(d/2, b/2 + 1), direction uniform
  std::gamma_distribution<double> ga(0.5 * d, 1.0), gb(0.5 * p.spring.b + 1.0, 1.0);
  const double A = ga(rng), B = gb(rng);
  const double r = std::sqrt(p.spring.b * A / (A + B));
  double n2;
  do {
    n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      q[k] = N(rng);
      n2 += q[k] * q[k];
    }
  } while (n2 == 0.0);
  const double f = r / std::sqrt(n2);
  for (int k = 0; k < d; ++k) q[k] *= f;
}

}  // namespace

DumbbellEnsemble make_ensemble(const McParams& p, std::size_t n_paths, std::uint64_t seed,
                               double anisotropy) {
  validate(p);
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  if (std::abs(anisotropy) >= 1.0) throw std::invalid_argument("anisotropy must lie in (-1, 1)");
  if (anisotropy != 0.0 && p.spring.kind == SpringKind::Free)
    throw std::invalid_argument("anisotropic initial data needs a confining spring");
  const int d = p.dim;
  DumbbellEnsemble e;
  e.dim = d;
  e.n_paths = n_paths;
  e.seed = seed;
  e.x.assign(n_paths * d, 0.0);
  e.q.assign(n_paths * d, 0.0);
  e.op_time.assign(n_paths, 0.0);
  e.clock.assign(n_paths, 0.0);
  e.pending.assign(n_paths, 0.0);
  e.flagged.assign(n_paths, 0);
  e.rng.resize(n_paths);
  e.normal.resize(n_paths);
  const double sq = range_sq(p.spring);
  parallel_for(n_paths, [&](std::size_t b, std::size_t end) {
    for (std::size_t i = b; i < end; ++i) {
      Rng& r = e.rng[i] = Rng(seed, i);
      auto& N = e.normal[i];
      double* x = e.x.data() + i * d;
      double* q = e.q.data() + i * d;
      for (int k = 0; k < d; ++k) x[k] = kTwoPi * r.uniform();
      for (;;) {
        sample_equilibrium(p, r, N, q);
        if (anisotropy == 0.0) break;
        const double w = 1.0 + anisotropy * (q[0] * q[0] - q[1] * q[1]) / sq;
        if (r.uniform() * (1.0 + std::abs(anisotropy)) < w) break;
      }
      if (p.sub.alpha < 1.0) e.pending[i] = sample_subordinator_increment(p.sub, p.op_step, r);
    }
  });
  return e;
}

namespace {

// One Euler-Maruyama step of operational length h. Returns false when the
// FENE rejection loop gives up.
bool em_step(const McParams& p, const VelocityField& vel, double h, Rng& rng,
             std::normal_distribution<double>& N, double* x, double* q) {
  const int d = p.dim;
  double u[3] = {0, 0, 0}, G[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  if (vel) vel(x, u, G);
  const double sx = std::sqrt(2.0 * p.eps * h), sq = std::sqrt(h / p.lambda);
  for (int k = 0; k < d; ++k) {
    double v = x[k] + u[k] * h + sx * N(rng);
    v = std::fmod(v, kTwoPi);
    if (v < 0.0) v += kTwoPi;
    x[k] = v;
  }
  double r2 = 0.0;
  for (int k = 0; k < d; ++k) r2 += q[k] * q[k];
  const double ff = force_factor(p.spring, r2) / (2.0 * p.lambda);
  double drift[3];
  for (int j = 0; j < d; ++j) {
    double w = 0.0;
    for (int k = 0; k < d; ++k) w += 0.5 * (G[j * d + k] - G[k * d + j]) * q[k];
    drift[j] = q[j] + h * (w - ff * q[j]);
  }
  const double R2 = range_sq(p.spring);
  double prop[3];
  for (int attempt = 0; attempt <= p.max_retries; ++attempt) {
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      prop[k] = drift[k] + sq * N(rng);
      n2 += prop[k] * prop[k];
    }
    if (p.spring.kind != SpringKind::FENE || n2 < R2) {
      for (int k = 0; k < d; ++k) q[k] = prop[k];
      return true;
    }
  }
  return false;
}

}  // namespace

void advance_ensemble(DumbbellEnsemble& e, const McParams& p, double t_new,
                      const VelocityField& vel) {
  validate(p);
  if (p.dim != e.dim) throw std::invalid_argument("ensemble dimension mismatch");
  if (!(t_new > e.t)) throw std::invalid_argument("advance_ensemble needs t_new > current time");
  const double dt = t_new - e.t;
  const int d = e.dim;
  parallel_for(e.n_paths, [&](std::size_t b, std::size_t end) {
    for (std::size_t i = b; i < end; ++i) {
      if (e.flagged[i]) continue;
      double* x = e.x.data() + i * d;
      double* q = e.q.data() + i * d;
      Rng& r = e.rng[i];
      auto& N = e.normal[i];
      if (p.sub.alpha == 1.0) {
        if (!em_step(p, vel, dt, r, N, x, q)) e.flagged[i] = 1;
        e.op_time[i] += dt;
        e.clock[i] = t_new;
        continue;
      }
      while (e.clock[i] + e.pending[i] <= t_new) {
        e.clock[i] += e.pending[i];
        e.op_time[i] += p.op_step;
        if (!em_step(p, vel, p.op_step, r, N, x, q)) {
          e.flagged[i] = 1;
          break;
        }
        e.pending[i] = sample_subordinator_increment(p.sub, p.op_step, r);
      }
    }
  });
  e.t = t_new;
}

Histogram make_histogram(const std::vector<std::vector<double>>& edges) {
  Histogram h;
  h.edges = edges;
  std::size_t n = 1;
  for (const auto& e : edges) {
    if (e.size() < 2) throw std::invalid_argument("histogram axis needs at least one bin");
    for (std::size_t k = 1; k < e.size(); ++k)
      if (!(e[k] > e[k - 1])) throw std::invalid_argument("histogram edges must increase");
    n *= e.size() - 1;
  }
  h.mass.assign(n, 0.0);
  return h;
}

namespace {

std::vector<double> uniform_edges(double lo, double hi, int n) {
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) e[k] = lo + (hi - lo) * k / n;
  return e;
}

// bin index along one axis, or -1 outside
long bin_of(const std::vector<double>& e, double v) {
  const double lo = e.front(), hi = e.back();
  if (v < lo || v > hi) return -1;
  const long n = static_cast<long>(e.size()) - 1;
  long k = static_cast<long>(std::upper_bound(e.begin(), e.end(), v) - e.begin()) - 1;
  return std::clamp(k, 0L, n - 1);
}

void fill(Histogram& h, const DumbbellEnsemble& e, bool with_x) {
  const int d = e.dim;
  double total = 0.0;
  std::vector<double> coords;
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    if (e.flagged[i]) continue;
    coords.clear();
    if (with_x) coords.insert(coords.end(), e.xp(i), e.xp(i) + d);
    coords.insert(coords.end(), e.qp(i), e.qp(i) + d);
    std::size_t idx = 0;
    bool inside = true;
    for (std::size_t a = 0; a < coords.size() && inside; ++a) {
      const long k = bin_of(h.edges[a], coords[a]);
      if (k < 0) inside = false;
      idx = idx * (h.edges[a].size() - 1) + static_cast<std::size_t>(k);
    }
    if (!inside) continue;
    h.mass[idx] += 1.0;
    total += 1.0;
  }
  if (total > 0.0)
    for (auto& m : h.mass) m /= total;
}

}  // namespace

Histogram empirical_density(const DumbbellEnsemble& e, int x_bins, int q_bins, double q_range) {
  std::vector<std::vector<double>> edges;
  for (int k = 0; k < e.dim; ++k) edges.push_back(uniform_edges(0.0, kTwoPi, x_bins));
  for (int k = 0; k < e.dim; ++k) edges.push_back(uniform_edges(-q_range, q_range, q_bins));
  Histogram h = make_histogram(edges);
  fill(h, e, true);
  return h;
}

Histogram q_marginal(const DumbbellEnsemble& e, int q_bins, double q_range) {
  std::vector<std::vector<double>> edges;
  for (int k = 0; k < e.dim; ++k) edges.push_back(uniform_edges(-q_range, q_range, q_bins));
  Histogram h = make_histogram(edges);
  fill(h, e, false);
  return h;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  const std::size_t na = h.edges.size();
  for (std::size_t a = 0; a < na; ++a) os << "lo_" << a << ",hi_" << a << ",";
  os << "mass\n";
  std::vector<std::size_t> idx(na, 0);
  const auto old = os.precision(17);
  for (std::size_t b = 0; b < h.mass.size(); ++b) {
    std::size_t r = b;
    for (std::size_t a = na; a-- > 0;) {
      const std::size_t nb = h.edges[a].size() - 1;
      idx[a] = r % nb;
      r /= nb;
    }
    for (std::size_t a = 0; a < na; ++a)
      os << h.edges[a][idx[a]] << "," << h.edges[a][idx[a] + 1] << ",";
    os << h.mass[b] << "\n";
  }
  os.precision(old);
}

Histogram read_histogram_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("histogram CSV: empty input");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 3 || (cols - 1) % 2 != 0) throw std::runtime_error("histogram CSV: bad header");
  const std::size_t na = (cols - 1) / 2;
  std::vector<std::set<double>> edges(na);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != cols) throw std::runtime_error("histogram CSV: ragged row");
    for (std::size_t a = 0; a < na; ++a) {
      edges[a].insert(v[2 * a]);
      edges[a].insert(v[2 * a + 1]);
    }
    rows.push_back(std::move(v));
  }
  std::vector<std::vector<double>> ev;
  for (const auto& s : edges) ev.emplace_back(s.begin(), s.end());
  Histogram h = make_histogram(ev);
  if (rows.size() != h.mass.size()) throw std::runtime_error("histogram CSV: bins do not tile the grid");
  for (const auto& v : rows) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < na; ++a) {
      const auto k = static_cast<std::size_t>(
          std::lower_bound(ev[a].begin(), ev[a].end(), v[2 * a]) - ev[a].begin());
      idx = idx * (ev[a].size() - 1) + k;
    }
    h.mass[idx] = v.back();
  }
  return h;
}

}  // namespace fnsfp::mc
