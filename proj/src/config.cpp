#include "fnsfp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fnsfp {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"alpha", "Re", "lambda", "eps", "gamma_c", "spring", "b", "dim"}},
    {"physical", {"zeta", "H", "k_B_mu_T", "rho", "eta", "N", "L0", "U0"}},
    {"time", {"dt", "n_steps", "horizon"}},
    {"basis", {"n_modes_x", "n_modes_q"}},
    {"initial",
     {"preset", "velocity_amplitude", "psi_amplitude", "bump_amplitude", "radial_amplitude",
      "coefficients"}},
    {"solver", {"coupling", "freeze_velocity", "picard", "picard_max_iter", "picard_tol", "mass_tol"}},
    {"output", {"dir", "stride", "checkpoint_every"}},
    {"run", {"seed"}},
    {"mc", {"n_paths", "t_final", "op_step", "tau0", "anisotropy", "frozen_velocity", "q_bins", "q_range"}},
};

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
  throw ConfigError(key + ": " + msg);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& t) : t_(t) {}

  bool has(const std::string& key) const { return t_.get_optional<std::string>(path(key)).has_value(); }

  std::string str(const std::string& key, const std::string& def) const {
    auto v = t_.get_optional<std::string>(path(key));
    return v ? *v : def;
  }

  double num(const std::string& key, double def) const {
    auto v = t_.get_optional<std::string>(path(key));
    if (!v) return def;
    double x = 0.0;
    const char* b = v->data();
    const char* e = b + v->size();
    auto r = std::from_chars(b, e, x);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x)) fail(key, "expected a number, got '" + *v + "'");
    return x;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t def) const {
    auto v = t_.get_optional<std::string>(path(key));
    if (!v) return def;
    std::uint64_t x = 0;
    const char* b = v->data();
    const char* e = b + v->size();
    auto r = std::from_chars(b, e, x);
    if (r.ec != std::errc() || r.ptr != e) fail(key, "expected a nonnegative integer, got '" + *v + "'");
    return x;
  }

  bool flag(const std::string& key, bool def) const {
    auto v = t_.get_optional<std::string>(path(key));
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(key, "expected true or false, got '" + *v + "'");
  }

 private:
  static pt::ptree::path_type path(const std::string& key) { return pt::ptree::path_type(key, '.'); }
  const pt::ptree& t_;
};

void check_keys(const pt::ptree& t) {
  for (const auto& [sec, body] : t) {
    auto it = kKeys.find(sec);
    if (it == kKeys.end()) {
      if (body.empty()) fail(sec, "keys must live inside a section");
      fail(sec, "unknown section");
    }
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) fail(sec + "." + key, "unknown key");
      if (!val.empty()) fail(sec + "." + key, "nesting is not supported");
    }
  }
}

template <class F>
void guarded(const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(key, e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  check_keys(tree);
  const Reader r(tree);
  RunConfig c;

  ModelParams& m = c.model;
  m.alpha = r.num("model.alpha", m.alpha);
  m.Re = r.num("model.Re", m.Re);
  m.lambda = r.num("model.lambda", m.lambda);
  m.eps = r.num("model.eps", m.eps);
  m.gamma_c = r.num("model.gamma_c", m.gamma_c);
  m.dim = static_cast<int>(r.uint("model.dim", 2));
  const std::string spring = r.str("model.spring", "fene");
  if (spring == "fene") {
    m.spring.kind = SpringKind::FENE;
  } else if (spring == "hookean") {
    m.spring.kind = SpringKind::Hookean;
  } else {
    fail("model.spring", "expected fene or hookean, got '" + spring + "'");
  }
  m.spring.b = r.num("model.b", m.spring.b);
  if (r.has("model.b") && m.spring.kind != SpringKind::FENE) fail("model.b", "only used by the FENE spring");

  if (tree.get_child_optional("physical")) {
    for (const char* k : {"Re", "lambda", "eps", "gamma_c"})
      if (r.has(std::string("model.") + k))
        fail(std::string("model.") + k, "conflicts with the [physical] section, which derives it");
    PhysicalParams p{};
    const char* keys[] = {"zeta", "H", "k_B_mu_T", "rho", "eta", "N", "L0", "U0"};
    double* dst[] = {&p.zeta, &p.H, &p.k_B_mu_T, &p.rho, &p.eta, &p.N, &p.L0, &p.U0};
    for (int i = 0; i < 8; ++i) {
      const std::string key = std::string("physical.") + keys[i];
      if (!r.has(key)) fail(key, "missing required key");
      *dst[i] = r.num(key, 0.0);
    }
    guarded("physical", [&] { validate(p); });
    m = nondimensionalize(p, m.alpha, m);
    c.physical = p;
  }
  guarded("model.spring", [&] { validate(m.spring); });
  if (!(m.alpha > 0.5 && m.alpha <= 1.0))
    fail("model.alpha", "alpha must lie in (1/2, 1], got " + r.str("model.alpha", ""));
  guarded("model", [&] { validate(m); });

  c.dt = r.num("time.dt", c.dt);
  if (!(c.dt > 0.0)) fail("time.dt", "must be positive");
  c.n_steps = r.uint("time.n_steps", c.n_steps);
  c.horizon = r.num("time.horizon", 0.0);
  if (c.horizon < 0.0) fail("time.horizon", "must be nonnegative");
  if (c.horizon > 0.0 && c.dt * static_cast<double>(c.n_steps) > c.horizon * (1.0 + 1e-12))
    fail("time.horizon", "dt * n_steps exceeds the horizon");

  c.n_modes_x = static_cast<int>(r.uint("basis.n_modes_x", 2));
  c.n_modes_q = static_cast<int>(r.uint("basis.n_modes_q", 15));
  if (c.n_modes_x < 1) fail("basis.n_modes_x", "must be at least 1");
  if (c.n_modes_q < 1 || c.n_modes_q > kMaxConfigModes)
    fail("basis.n_modes_q", "must lie in [1, " + std::to_string(kMaxConfigModes) + "]");

  InitialSpec& ini = c.initial;
  guarded("initial.preset", [&] { ini.preset = parse_preset(r.str("initial.preset", "shear-mode")); });
  ini.velocity_amplitude = r.num("initial.velocity_amplitude", ini.velocity_amplitude);
  ini.psi_amplitude = r.num("initial.psi_amplitude", ini.psi_amplitude);
  ini.bump_amplitude = r.num("initial.bump_amplitude", ini.bump_amplitude);
  ini.radial_amplitude = r.num("initial.radial_amplitude", ini.radial_amplitude);
  if (r.has("initial.coefficients")) {
    fs::path p = r.str("initial.coefficients", "");
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) fail("initial.coefficients", "file not found: " + p.string());
    c.coefficient_file = p.string();
  }

  SolverOptions& so = c.solver;
  so.coupling = r.flag("solver.coupling", so.coupling);
  so.freeze_velocity = r.flag("solver.freeze_velocity", so.freeze_velocity);
  so.picard = r.flag("solver.picard", so.picard);
  so.picard_max_iter = static_cast<int>(r.uint("solver.picard_max_iter", 5));
  if (so.picard_max_iter < 1 || so.picard_max_iter > 5) fail("solver.picard_max_iter", "must lie in [1, 5]");
  so.picard_tol = r.num("solver.picard_tol", so.picard_tol);
  so.mass_tol = r.num("solver.mass_tol", so.mass_tol);
  if (!(so.picard_tol > 0.0)) fail("solver.picard_tol", "must be positive");
  if (!(so.mass_tol > 0.0)) fail("solver.mass_tol", "must be positive");

  c.out_dir = r.str("output.dir", c.out_dir);
  c.stride = r.uint("output.stride", c.stride);
  if (c.stride == 0) fail("output.stride", "must be at least 1");
  c.checkpoint_every = r.uint("output.checkpoint_every", c.checkpoint_every);
  c.seed = r.uint("run.seed", c.seed);

  McConfig& mc = c.mc;
  mc.n_paths = r.uint("mc.n_paths", mc.n_paths);
  if (mc.n_paths == 0) fail("mc.n_paths", "must be positive");
  mc.t_final = r.num("mc.t_final", mc.t_final);
  if (!(mc.t_final > 0.0)) fail("mc.t_final", "must be positive");
  mc.op_step = r.num("mc.op_step", mc.op_step);
  if (!(mc.op_step > 0.0)) fail("mc.op_step", "must be positive");
  mc.tau0 = r.num("mc.tau0", mc.tau0);
  if (!(mc.tau0 > 0.0)) fail("mc.tau0", "must be positive");
  mc.anisotropy = r.num("mc.anisotropy", mc.anisotropy);
  if (!(std::abs(mc.anisotropy) < 1.0)) fail("mc.anisotropy", "must lie in (-1, 1)");
  mc.frozen_velocity = r.flag("mc.frozen_velocity", mc.frozen_velocity);
  mc.q_bins = static_cast<int>(r.uint("mc.q_bins", 12));
  if (mc.q_bins < 1) fail("mc.q_bins", "must be at least 1");
  mc.q_range = r.num("mc.q_range", 0.0);
  if (mc.q_range < 0.0) fail("mc.q_range", "must be nonnegative");
  if (mc.q_range == 0.0) mc.q_range = m.spring.kind == SpringKind::FENE ? std::sqrt(m.spring.b) : 3.0;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string());
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const ModelParams& m = c.model;
  os << "[model]\nalpha = " << m.alpha << "\nspring = "
     << (m.spring.kind == SpringKind::FENE ? "fene" : "hookean") << "\ndim = " << m.dim << '\n';
  if (m.spring.kind == SpringKind::FENE) os << "b = " << m.spring.b << '\n';
  if (c.physical) {
    const PhysicalParams& p = *c.physical;
    os << "\n[physical]\nzeta = " << p.zeta << "\nH = " << p.H << "\nk_B_mu_T = " << p.k_B_mu_T
       << "\nrho = " << p.rho << "\neta = " << p.eta << "\nN = " << p.N << "\nL0 = " << p.L0
       << "\nU0 = " << p.U0 << '\n';
  } else {
    os << "Re = " << m.Re << "\nlambda = " << m.lambda << "\neps = " << m.eps
       << "\ngamma_c = " << m.gamma_c << '\n';
  }
  os << "\n[time]\ndt = " << c.dt << "\nn_steps = " << c.n_steps << '\n';
  if (c.horizon > 0.0) os << "horizon = " << c.horizon << '\n';
  os << "\n[basis]\nn_modes_x = " << c.n_modes_x << "\nn_modes_q = " << c.n_modes_q << '\n';
  const InitialSpec& i = c.initial;
  os << "\n[initial]\npreset = " << preset_name(i.preset)
     << "\nvelocity_amplitude = " << i.velocity_amplitude << "\npsi_amplitude = " << i.psi_amplitude
     << "\nbump_amplitude = " << i.bump_amplitude << "\nradial_amplitude = " << i.radial_amplitude
     << '\n';
  if (!c.coefficient_file.empty()) os << "coefficients = " << c.coefficient_file << '\n';
  const SolverOptions& s = c.solver;
  os << std::boolalpha << "\n[solver]\ncoupling = " << s.coupling
     << "\nfreeze_velocity = " << s.freeze_velocity << "\npicard = " << s.picard
     << "\npicard_max_iter = " << s.picard_max_iter << "\npicard_tol = " << s.picard_tol
     << "\nmass_tol = " << s.mass_tol << '\n';
  os << "\n[output]\ndir = " << c.out_dir << "\nstride = " << c.stride
     << "\ncheckpoint_every = " << c.checkpoint_every << '\n';
  os << "\n[run]\nseed = " << c.seed << '\n';
  const McConfig& mc = c.mc;
  os << "\n[mc]\nn_paths = " << mc.n_paths << "\nt_final = " << mc.t_final
     << "\nop_step = " << mc.op_step << "\ntau0 = " << mc.tau0 << "\nanisotropy = " << mc.anisotropy
     << "\nfrozen_velocity = " << mc.frozen_velocity << "\nq_bins = " << mc.q_bins
     << "\nq_range = " << mc.q_range << '\n';
  return os.str();
}

InitialData read_coefficients(const std::string& path, const Discretization& d) {
  std::ifstream f(path);
  if (!f) throw ConfigError("initial.coefficients: cannot open " + path);
  InitialData out;
  out.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.ku()));
  out.psi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.kx()), static_cast<Eigen::Index>(d.kq()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || (lineno == 1 && line.rfind("field", 0) == 0)) continue;
    std::istringstream ls(line);
    std::string field, si, sj, sv;
    if (!std::getline(ls, field, ',') || !std::getline(ls, si, ',') || !std::getline(ls, sj, ',') ||
        !std::getline(ls, sv))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected field,i,j,value");
    std::size_t i = 0, j = 0;
    double v = 0.0;
    try {
      i = std::stoul(si);
      j = std::stoul(sj);
      v = std::stod(sv);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (field == "u" && i < d.ku() && j == 0) {
      out.u(static_cast<Eigen::Index>(i)) = v;
    } else if (field == "psi" && i < d.kx() && j < d.kq()) {
      out.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    } else {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": index outside the active basis");
    }
  }
  return out;
}

void write_coefficients(const std::string& path, const InitialData& data) {
  std::ofstream f(path);
  f.precision(17);
  f << "field,i,j,value\n";
  for (Eigen::Index i = 0; i < data.u.size(); ++i) f << "u," << i << ",0," << data.u(i) << '\n';
  for (Eigen::Index a = 0; a < data.psi.rows(); ++a)
    for (Eigen::Index m = 0; m < data.psi.cols(); ++m)
      f << "psi," << a << ',' << m << ',' << data.psi(a, m) << '\n';
  if (!f) throw std::runtime_error("cannot write " + path);
}

}  // namespace fnsfp
