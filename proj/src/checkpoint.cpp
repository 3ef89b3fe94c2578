#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "fnsfp/io.hpp"

namespace fnsfp {

namespace {

constexpr const char* kMagic = "FNSFP-CHECKPOINT";

using json = nlohmann::json;

json model_json(const ModelParams& m) {
  return {{"alpha", m.alpha}, {"Re", m.Re},   {"lambda", m.lambda},
          {"eps", m.eps},     {"gamma_c", m.gamma_c},
          {"spring", m.spring.kind == SpringKind::FENE ? "fene" : "hookean"},
          {"b", m.spring.b},  {"dim", m.dim}};
}

ModelParams model_from(const json& j) {
  ModelParams m;
  m.alpha = j.at("alpha");
  m.Re = j.at("Re");
  m.lambda = j.at("lambda");
  m.eps = j.at("eps");
  m.gamma_c = j.at("gamma_c");
  m.spring.kind = j.at("spring") == "fene" ? SpringKind::FENE : SpringKind::Hookean;
  m.spring.b = j.at("b");
  m.dim = j.at("dim");
  return m;
}

void put(std::string& buf, const double* p, std::size_t n) {
  buf.append(reinterpret_cast<const char*>(p), n * sizeof(double));
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t gl_hash(const std::vector<double>& w) { return fnv1a(w.data(), w.size() * sizeof(double)); }

void save_checkpoint(const std::string& path, CheckpointHeader h, const SpectralState& s) {
  std::string payload;
  put(payload, s.u.data(), static_cast<std::size_t>(s.u.size()));
  const Eigen::MatrixXd pr = s.psi.transpose(), fr = s.phi.transpose();
  put(payload, pr.data(), static_cast<std::size_t>(pr.size()));
  put(payload, fr.data(), static_cast<std::size_t>(fr.size()));
  put(payload, s.u_hist.data(), s.u_hist.size());
  put(payload, s.psi_hist.data(), s.psi_hist.size());
  put(payload, s.phi_hist.data(), s.phi_hist.size());
  h.step = s.step;
  h.payload_bytes = payload.size();
  h.payload_checksum = fnv1a(payload.data(), payload.size());

  // hashes as strings: JSON numbers are not guaranteed 64-bit exact
  const json j = {{"version", h.version},
                  {"model", model_json(h.model)},
                  {"ku", h.ku},
                  {"kx", h.kx},
                  {"kq", h.kq},
                  {"n_modes_x", h.n_modes_x},
                  {"n_modes_q", h.n_modes_q},
                  {"dt", h.dt},
                  {"n_steps", h.n_steps},
                  {"step", h.step},
                  {"t", s.t},
                  {"gl_hash", std::to_string(h.gl_hash)},
                  {"config_hash", std::to_string(h.config_hash)},
                  {"payload_checksum", std::to_string(h.payload_checksum)},
                  {"payload_bytes", h.payload_bytes}};
  std::string out = std::string(kMagic) + '\n' + j.dump() + '\n';
  out += payload;
  write_atomic(path, out);
}

SpectralState load_checkpoint(const std::string& path, CheckpointHeader& h) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string magic, header;
  if (!std::getline(f, magic) || magic != kMagic) throw std::runtime_error("checkpoint: bad magic in " + path);
  if (!std::getline(f, header)) throw std::runtime_error("checkpoint: missing header");
  json j;
  double t = 0.0;
  try {
    j = json::parse(header);
    h.version = j.at("version");
    h.model = model_from(j.at("model"));
    h.ku = j.at("ku");
    h.kx = j.at("kx");
    h.kq = j.at("kq");
    h.n_modes_x = j.at("n_modes_x");
    h.n_modes_q = j.at("n_modes_q");
    h.dt = j.at("dt");
    h.n_steps = j.at("n_steps");
    h.step = j.at("step");
    t = j.at("t");
    h.gl_hash = std::stoull(j.at("gl_hash").get<std::string>());
    h.config_hash = std::stoull(j.at("config_hash").get<std::string>());
    h.payload_checksum = std::stoull(j.at("payload_checksum").get<std::string>());
    h.payload_bytes = j.at("payload_bytes");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (h.version != 1) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(h.version));
  const std::size_t N = h.kx * h.kq, L = h.step + 1;
  const std::size_t expect = sizeof(double) * (h.ku + 2 * N + L * (h.ku + 2 * N));
  if (h.payload_bytes != expect) throw std::runtime_error("checkpoint: payload size does not match header");
  std::string payload(h.payload_bytes, '\0');
  f.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(f.gcount()) != payload.size() || f.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("checkpoint: truncated or oversized payload");
  if (fnv1a(payload.data(), payload.size()) != h.payload_checksum)
    throw std::runtime_error("checkpoint: checksum mismatch");

  const char* p = payload.data();
  const auto take = [&](double* dst, std::size_t n) {
    std::memcpy(dst, p, n * sizeof(double));
    p += n * sizeof(double);
  };
  SpectralState s;
  s.step = h.step;
  s.t = t;
  s.u.resize(static_cast<Eigen::Index>(h.ku));
  take(s.u.data(), h.ku);
  Eigen::MatrixXd pr(static_cast<Eigen::Index>(h.kq), static_cast<Eigen::Index>(h.kx)), fr = pr;
  take(pr.data(), N);
  take(fr.data(), N);
  s.psi = pr.transpose();
  s.phi = fr.transpose();
  s.u_hist.resize(L * h.ku);
  s.psi_hist.resize(L * N);
  s.phi_hist.resize(L * N);
  take(s.u_hist.data(), s.u_hist.size());
  take(s.psi_hist.data(), s.psi_hist.size());
  take(s.phi_hist.data(), s.phi_hist.size());
  return s;
}

}  // namespace fnsfp
