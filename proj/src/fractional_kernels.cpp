#include "fnsfp/fractional_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fnsfp/simd.hpp"

namespace fnsfp::fk {

FractionalOrder::FractionalOrder(double a) : alpha(a) {
  if (!(a > 0.0 && a <= 1.0))
    throw std::invalid_argument("fractional order must lie in (0, 1], got " + std::to_string(a));
}

TimeGrid::TimeGrid(double dt_, std::size_t n) : dt(dt_), n_steps(n) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("time step must be > 0");
  if (n == 0) throw std::invalid_argument("time grid needs at least one step");
}

SampledPath::SampledPath(TimeGrid g, std::size_t d)
    : grid(g), dim(d), values((g.n_steps + 1) * d, 0.0) {
  if (d == 0) throw std::invalid_argument("path dimension must be positive");
}

double kernel_eval(double order, double t) {
  if (!(order > 0.0)) throw std::domain_error("kernel order must be positive");
  if (!(t > 0.0)) throw std::domain_error("kernel g_a is evaluated only for t > 0");
  if (order == 1.0) return 1.0;
  return std::exp((order - 1.0) * std::log(t) - std::lgamma(order));
}

std::vector<double> gl_weights(double order, std::size_t n) {
  if (!(order >= 0.0)) throw std::invalid_argument("GL order must be >= 0");
  std::vector<double> w(n + 1);
  w[0] = 1.0;
  for (std::size_t j = 1; j <= n; ++j)
    w[j] = w[j - 1] * (1.0 - (1.0 + order) / static_cast<double>(j));
  return w;
}

std::vector<double> pr_weights(double order, double dt, std::size_t n) {
  if (!(order > 0.0)) throw std::invalid_argument("convolution order must be positive");
  std::vector<double> w(n + 1);
  const double scale = std::exp(order * std::log(dt) - std::lgamma(order + 1.0));
  w[0] = scale;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i);
    // (i+1)^a - i^a without cancellation
    w[i] = scale * std::pow(x, order) * std::expm1(order * std::log1p(1.0 / x));
  }
  return w;
}

KernelWeights make_weights(FractionalOrder order, const TimeGrid& grid, Scheme scheme) {
  KernelWeights kw{order.alpha, grid.dt, {}, scheme};
  kw.weights = scheme == Scheme::GrunwaldLetnikov ? gl_weights(order.alpha, grid.n_steps)
                                                  : pr_weights(order.alpha, grid.dt, grid.n_steps);
  return kw;
}

namespace {

// Component-major copy so every convolution row is a contiguous dot product.
std::vector<double> transpose(const SampledPath& p) {
  const std::size_t n = p.size();
  std::vector<double> out(n * p.dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < p.dim; ++c) out[c * n + i] = p.values[i * p.dim + c];
  return out;
}

}  // namespace

SampledPath fractional_convolve(double order, const SampledPath& path) {
  if (!(order > 0.0 && order <= 1.0))
    throw std::invalid_argument("convolution order must lie in (0, 1]");
  const std::size_t N = path.grid.n_steps;
  const std::vector<double> w = pr_weights(order, path.grid.dt, N);
  // out[n] = sum_{j=1..n} w[n-j] f[j] = dot(wr + (N-n), f + 1, n)
  std::vector<double> wr(N);
  for (std::size_t i = 0; i < N; ++i) wr[N - 1 - i] = w[i];
  const std::vector<double> f = transpose(path);
  SampledPath out(path.grid, path.dim);
  for (std::size_t c = 0; c < path.dim; ++c) {
    const double* fc = f.data() + c * (N + 1);
    for (std::size_t n = 1; n <= N; ++n)
      out.values[n * path.dim + c] = simd::dot(wr.data() + (N - n), fc + 1, n);
  }
  return out;
}

double extrapolate_to_zero(const double* t, const double* y, std::size_t k) {
  std::vector<double> p(y, y + k);
  for (std::size_t m = 1; m < k; ++m)
    for (std::size_t i = 0; i + m < k; ++i)
      p[i] = (t[i + m] * p[i] - t[i] * p[i + 1]) / (t[i + m] - t[i]);
  return p[0];
}

namespace {

std::vector<double> trace_from(const SampledPath& conv) {
  const std::size_t k = std::min<std::size_t>(4, conv.grid.n_steps);
  std::vector<double> tr(conv.dim), t(k), y(k);
  for (std::size_t i = 0; i < k; ++i) t[i] = conv.grid.t(i + 1);
  for (std::size_t c = 0; c < conv.dim; ++c) {
    for (std::size_t i = 0; i < k; ++i) y[i] = conv.at(i + 1)[c];
    tr[c] = extrapolate_to_zero(t.data(), y.data(), k);
  }
  return tr;
}

SampledPath convolve_or_copy(double order, const SampledPath& path) {
  if (order > 0.0) return fractional_convolve(order, path);
  return path;
}

}  // namespace

std::vector<double> convolution_trace(double order, const SampledPath& path) {
  return trace_from(convolve_or_copy(order, path));
}

SampledPath rl_derivative(FractionalOrder order, const SampledPath& path, Scheme scheme) {
  const std::size_t N = path.grid.n_steps, d = path.dim;
  const double dt = path.grid.dt;
  SampledPath out(path.grid, d);
  if (scheme == Scheme::GrunwaldLetnikov) {
    const std::vector<double> w = gl_weights(order.alpha, N);
    const double scale = std::pow(dt, order.alpha);
    const std::vector<double> f = transpose(path);
    std::vector<double> wr(N + 1);
    for (std::size_t i = 0; i <= N; ++i) wr[N - i] = w[i];
    for (std::size_t c = 0; c < d; ++c) {
      const double* fc = f.data() + c * (N + 1);
      for (std::size_t n = 0; n <= N; ++n) {
        out.values[n * d + c] = simd::dot(wr.data() + (N - n), fc, n + 1) / scale;
      }
    }
    return out;
  }
  const double beta = 1.0 - order.alpha;
  SampledPath conv = convolve_or_copy(beta, path);
  const std::vector<double> tr = trace_from(conv);
  for (std::size_t c = 0; c < d; ++c) conv.values[c] = tr[c];
  for (std::size_t n = 1; n <= N; ++n)
    for (std::size_t c = 0; c < d; ++c)
      out.values[n * d + c] = (conv.values[n * d + c] - conv.values[(n - 1) * d + c]) / dt;
  for (std::size_t c = 0; c < d; ++c) out.values[c] = out.values[d + c];
  return out;
}

double deconvolution_residual(FractionalOrder order, const SampledPath& path, double t_cut) {
  const std::size_t N = path.grid.n_steps, d = path.dim;
  const SampledPath D = rl_derivative(order, path, Scheme::ProductRectangle);
  const SampledPath back = convolve_or_copy(order.alpha, D);
  const std::vector<double> tr = convolution_trace(1.0 - order.alpha, path);
  double worst = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double t = path.grid.t(n);
    if (t < t_cut) continue;
    const double g = kernel_eval(order.alpha, t);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double r = back.at(n)[c] - path.at(n)[c] + tr[c] * g;
      s += r * r;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

std::vector<double> chain_inequality_gap(FractionalOrder order, const SampledPath& path) {
  const std::size_t N = path.grid.n_steps, d = path.dim;
  const SampledPath Du = rl_derivative(order, path);
  SampledPath sq(path.grid, 1), one(path.grid, 1);
  for (std::size_t n = 0; n <= N; ++n) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += path.at(n)[c] * path.at(n)[c];
    sq.values[n] = s;
    one.values[n] = 1.0;
  }
  const SampledPath Dsq = rl_derivative(order, sq);
  const SampledPath k = rl_derivative(order, one);
  std::vector<double> gap(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    double ip = 0.0;
    for (std::size_t c = 0; c < d; ++c) ip += path.at(n)[c] * Du.at(n)[c];
    gap[n] = ip - 0.5 * Dsq.values[n] - 0.5 * k.values[n] * sq.values[n];
  }
  return gap;
}

double fraction_at_least(const std::vector<double>& gaps, double tol) {
  if (gaps.empty()) return 1.0;
  std::size_t ok = 0;
  for (double g : gaps) ok += g >= tol ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(gaps.size());
}

namespace {

SampledPath sample(const TimeGrid& g, double (*f)(double, double), double p) {
  SampledPath s(g, 1);
  for (std::size_t n = 1; n <= g.n_steps; ++n) s.values[n] = f(g.t(n), p);
  s.values[0] = f(0.0, p);
  return s;
}

double g_or_zero(double t, double a) { return t > 0.0 ? kernel_eval(a, t) : 0.0; }
double power(double t, double p) { return std::pow(t, p); }

double window_error(const SampledPath& got, double (*exact)(double, double), double p,
                    double t_cut) {
  double e = 0.0;
  for (std::size_t n = 1; n <= got.grid.n_steps; ++n) {
    const double t = got.grid.t(n);
    if (t < t_cut) continue;
    e = std::max(e, std::abs(got.values[n] - exact(t, p)));
  }
  return e;
}

}  // namespace

std::vector<IdentityResidual> identity_suite(const std::vector<double>& alphas,
                                             const std::vector<double>& dts, double T,
                                             double t_cut) {
  std::vector<IdentityResidual> rows;
  for (double a : alphas) {
    const FractionalOrder fa(a);
    for (double dt : dts) {
      const TimeGrid g(dt, static_cast<std::size_t>(std::llround(T / dt)));

      // g_a * g_{1-a} = 1
      {
        const SampledPath c = fractional_convolve(a, sample(g, g_or_zero, 1.0 - a));
        rows.push_back({"semigroup_complement", a, dt,
                        window_error(c, [](double, double) { return 1.0; }, 0.0, t_cut)});
      }
      // g_a * g_a = g_{2a}
      {
        const SampledPath c = fractional_convolve(a, sample(g, g_or_zero, a));
        rows.push_back({"semigroup_square", a, dt, window_error(c, g_or_zero, 2.0 * a, t_cut)});
      }
      rows.push_back({"deconvolution_kernel", a, dt,
                      deconvolution_residual(fa, sample(g, g_or_zero, a), t_cut)});
      rows.push_back(
          {"deconvolution_square", a, dt, deconvolution_residual(fa, sample(g, power, 2.0), t_cut)});
      // d^a 1 = g_{1-a}; d^a t = g_{2-a}; d^a g_a = 0
      {
        SampledPath one(g, 1);
        for (auto& v : one.values) v = 1.0;
        const SampledPath d = rl_derivative(fa, one);
        rows.push_back({"rl_constant", a, dt, window_error(d, g_or_zero, 1.0 - a, t_cut)});
      }
      {
        const SampledPath d = rl_derivative(fa, sample(g, power, 1.0));
        rows.push_back({"rl_linear", a, dt, window_error(d, g_or_zero, 2.0 - a, t_cut)});
      }
      {
        const SampledPath d = rl_derivative(fa, sample(g, g_or_zero, a), Scheme::ProductRectangle);
        rows.push_back(
            {"rl_kernel", a, dt, window_error(d, [](double, double) { return 0.0; }, 0.0, t_cut)});
      }
    }
  }
  return rows;
}

}  // namespace fnsfp::fk
