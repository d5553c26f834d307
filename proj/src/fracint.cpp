#include "pathwise/fracint.hpp"

#include "pathwise/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pathwise {

namespace {

double beta_fn(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fractional order must lie in (0,1)");
}

}  // namespace

IntegrandPath::IntegrandPath(double dt, std::vector<HSMatrix> values, std::int64_t start_step)
    : dt_(dt), start_step_(start_step), values_(std::move(values)) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("IntegrandPath: dt must be positive");
  if (values_.size() < 2) throw std::invalid_argument("IntegrandPath: need at least 2 nodes");
  for (const auto& m : values_) {
    if (m.rows() != values_.front().rows() || m.cols() != values_.front().cols())
      throw std::invalid_argument("IntegrandPath: inconsistent matrix shapes");
  }
}

IntegrandPath IntegrandPath::from_scalar(const SampledPath& g) {
  if (g.n_modes() != 1) throw std::invalid_argument("IntegrandPath::from_scalar: need one mode");
  std::vector<HSMatrix> v;
  v.reserve(static_cast<std::size_t>(g.n_nodes()));
  for (Eigen::Index j = 0; j < g.n_nodes(); ++j) v.push_back(HSMatrix::Constant(1, 1, g.values()(j, 0)));
  return IntegrandPath(g.dt(), std::move(v), g.start_step());
}

Eigen::Index IntegrandPath::index_of(double t) const {
  const double k = std::round(t / dt_);
  if (std::abs(t - k * dt_) > 1e-9 * dt_ + 1e-12 * std::abs(t))
    throw std::invalid_argument("IntegrandPath: time is not a grid node");
  const auto j = static_cast<std::int64_t>(k) - start_step_;
  if (j < 0 || j >= n_nodes()) throw std::out_of_range("IntegrandPath: time outside window");
  return static_cast<Eigen::Index>(j);
}

std::vector<double> IntegrandPath::entry_series(Eigen::Index j, Eigen::Index i) const {
  std::vector<double> out(values_.size());
  for (std::size_t p = 0; p < values_.size(); ++p) out[p] = values_[p](j, i);
  return out;
}

double holder_beta_norm(const IntegrandPath& g, double beta, double s, double t) {
  const auto a = g.index_of(s);
  const auto b = g.index_of(t);
  if (b - a < 1) throw std::invalid_argument("holder_beta_norm: fewer than 2 nodes");
  double sup = 0.0;
  for (auto k = a; k <= b; ++k) sup = std::max(sup, g.value(k).norm());
  double hol = 0.0;
  for (auto j = a + 1; j <= b; ++j) {
    const double wl = std::pow((j - a) * g.dt(), beta);
    for (auto k = j + 1; k <= b; ++k) {
      hol = std::max(hol, wl * (g.value(k) - g.value(j)).norm() / std::pow((k - j) * g.dt(), beta));
    }
  }
  return sup + hol;
}

// ---------------------------------------------------------------------------

double left_derivative(std::span<const double> g, double dt, double alpha, Eigen::Index s,
                       const CellPoint& r) {
  check_alpha(alpha);
  const Eigen::Index k = r.cell;
  if (k < s || k + 1 >= static_cast<Eigen::Index>(g.size()))
    throw std::out_of_range("left_derivative: point outside the window");
  if (k == s && r.x == 0.0) throw std::invalid_argument("left_derivative: r = s");
  const double gr = g[k] + r.x * (g[k + 1] - g[k]);
  const double dist = (static_cast<double>(k - s) + r.x) * dt;
  double integral = 0.0;
  // partial piece [t_k, r]: g(r) - g(q) = slope (r - q)
  if (r.x > 0.0) {
    const double slope = (g[k + 1] - g[k]) / dt;
    integral += slope * std::pow(r.x * dt, 1.0 - alpha) / (1.0 - alpha);
  }
  for (Eigen::Index j = s; j < k; ++j) {
    const double slope = (g[j + 1] - g[j]) / dt;
    const double v0 = (static_cast<double>(k - j) + r.x) * dt;      // r - t_j
    const double v1 = (static_cast<double>(k - j - 1) + r.x) * dt;  // r - t_{j+1}
    // g(r) - g(q) = dev + slope v with v = r - q on this piece
    const double dev = gr - g[j] - slope * v0;
    if (v1 > 0.0) integral += dev * (std::pow(v1, -alpha) - std::pow(v0, -alpha)) / alpha;
    integral += slope * (std::pow(v0, 1.0 - alpha) - (v1 > 0.0 ? std::pow(v1, 1.0 - alpha) : 0.0)) /
                (1.0 - alpha);
  }
  return (gr * std::pow(dist, -alpha) + alpha * integral) / std::tgamma(1.0 - alpha);
}

double right_derivative(std::span<const double> w, double dt, double alpha, Eigen::Index t,
                        const CellPoint& r) {
  check_alpha(alpha);
  const Eigen::Index k = r.cell;
  if (k < 0 || k >= t || t >= static_cast<Eigen::Index>(w.size()))
    throw std::out_of_range("right_derivative: point outside the window");
  if (k + 1 == t && r.x_complement == 0.0) throw std::invalid_argument("right_derivative: r = t");
  const double wr = w[k] + r.x * (w[k + 1] - w[k]);
  const double dist = (static_cast<double>(t - k - 1) + r.x_complement) * dt;  // t - r
  const double a1 = 1.0 - alpha;
  double integral = 0.0;
  // partial piece [r, t_{k+1}]: w(r) - w(q) = -slope (q - r)
  if (r.x_complement > 0.0) {
    const double slope = (w[k + 1] - w[k]) / dt;
    integral -= slope * std::pow(r.x_complement * dt, alpha) / alpha;
  }
  for (Eigen::Index l = k + 1; l < t; ++l) {
    const double slope = (w[l + 1] - w[l]) / dt;
    const double v0 = (static_cast<double>(l - k - 1) + r.x_complement) * dt;  // t_l - r
    const double v1 = (static_cast<double>(l - k) + r.x_complement) * dt;      // t_{l+1} - r
    // w(r) - w(q) = dev - slope v with v = q - r on this piece
    const double dev = wr - w[l] + slope * v0;
    if (v0 > 0.0) integral += dev * (std::pow(v0, -a1) - std::pow(v1, -a1)) / a1;
    integral -= slope * (std::pow(v1, alpha) - (v0 > 0.0 ? std::pow(v0, alpha) : 0.0)) / alpha;
  }
  return ((wr - w[t]) * std::pow(dist, -a1) + a1 * integral) / std::tgamma(alpha);
}

namespace {

CellPoint left_point(Eigen::Index s, double rel) {
  auto k = static_cast<Eigen::Index>(std::floor(rel));
  double x = rel - static_cast<double>(k);
  if (x == 0.0 && k > 0) {
    --k;
    x = 1.0;
  }
  return {s + k, x, 1.0 - x};
}

CellPoint right_point(Eigen::Index base, double rel) {
  const auto k = static_cast<Eigen::Index>(std::floor(rel));
  const double x = rel - static_cast<double>(k);
  return {base + k, x, 1.0 - x};
}

}  // namespace

SpectralField frac_deriv_left(const SampledPath& g, double alpha, double s, double r) {
  const auto a = g.index_of(s);
  if (!(r > s) || r > g.t_end() + 1e-12 * g.dt())
    throw std::invalid_argument("frac_deriv_left: need s < r inside the window");
  const CellPoint p = left_point(a, (r - s) / g.dt());
  SpectralField out(g.n_modes());
  for (int i = 0; i < g.n_modes(); ++i) out(i) = left_derivative(g.mode(i), g.dt(), alpha, a, p);
  return out;
}

HSMatrix frac_deriv_left(const IntegrandPath& g, double alpha, double s, double r) {
  const auto a = g.index_of(s);
  if (!(r > s) || r > g.time(g.n_nodes() - 1) + 1e-12 * g.dt())
    throw std::invalid_argument("frac_deriv_left: need s < r inside the window");
  const CellPoint p = left_point(a, (r - s) / g.dt());
  HSMatrix out(g.rows(), g.cols());
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      const auto series = g.entry_series(j, i);
      out(j, i) = left_derivative(series, g.dt(), alpha, a, p);
    }
  }
  return out;
}

SpectralField frac_deriv_right(const SampledPath& omega, double alpha, double r, double t) {
  const auto b = omega.index_of(t);
  if (!(r < t) || r < omega.t0() - 1e-12 * omega.dt())
    throw std::invalid_argument("frac_deriv_right: need r < t inside the window");
  const CellPoint p = right_point(0, std::max(0.0, (r - omega.t0()) / omega.dt()));
  SpectralField out(omega.n_modes());
  for (int i = 0; i < omega.n_modes(); ++i) {
    out(i) = right_derivative(omega.mode(i), omega.dt(), alpha, b, p);
  }
  return out;
}

// ---------------------------------------------------------------------------

FractionalKernel::FractionalKernel(double alpha, Eigen::Index cells) : alpha_(alpha) {
  check_alpha(alpha);
  if (cells < 1) throw std::invalid_argument("FractionalKernel: need at least one cell");
  const auto rule = TanhSinhRule::make(1.0 / 6.0, std::min(1.0 - alpha, alpha));
  const std::size_t nq = rule.size();
  const auto m = static_cast<std::size_t>(cells);

  // Local coordinates, dt = 1. In cell k (r = k + x) of an interval starting at node 0:
  //   D^alpha of a unit jump of g's slope on piece p: dP(k-p) / ((1-alpha) Gamma(1-alpha))
  //   D^alpha of the constant g_0:                    (k + x)^{-alpha} / Gamma(1-alpha)
  //   D^{1-alpha} of a unit increment on piece l:     -dR(l-k) / Gamma(1+alpha)
  // with dP(d) = (d+x)^{1-alpha} - (d-1+x)_+^{1-alpha}, dR(e) = (e+1-x)^alpha - (e-x)_+^alpha.
  std::vector<double> wdp(m * nq), dr(m * nq), wpow(m * nq);
  for (std::size_t d = 0; d < m; ++d) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double xd = static_cast<double>(d);
      const double p_hi = std::pow(xd + rule.x[q], 1.0 - alpha);
      const double p_lo = d > 0 ? std::pow(xd - 1.0 + rule.x[q], 1.0 - alpha) : 0.0;
      const double r_hi = std::pow(xd + rule.xc[q], alpha);
      const double r_lo = d > 0 ? std::pow(xd - 1.0 + rule.xc[q], alpha) : 0.0;
      wdp[d * nq + q] = rule.w[q] * (p_hi - p_lo);
      dr[d * nq + q] = r_hi - r_lo;
      wpow[d * nq + q] = rule.w[q] * std::pow(xd + rule.x[q], -alpha);
    }
  }
  const double g1 = std::tgamma(1.0 - alpha);
  const double g2 = std::tgamma(1.0 + alpha);
  const double c0 = -1.0 / (g1 * g2);
  const double c1 = -1.0 / (g1 * (1.0 - alpha) * g2);

  start_.assign(m, 0.0);
  incr_.assign(m, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t d = 0; d <= e; ++d) {
      const double* a0 = &wpow[d * nq];
      const double* a1 = &wdp[d * nq];
      const double* b = &dr[(e - d) * nq];
      for (std::size_t q = 0; q < nq; ++q) {
        s0 += a0[q] * b[q];
        s1 += a1[q] * b[q];
      }
    }
    start_[e] = c0 * s0;
    incr_[e] = c1 * s1;
  }
  // one cell, g = 1, omega(q) = q: the integral must be +1
  sign_ = start_[0] > 0.0 ? 1.0 : -1.0;
  for (auto& v : start_) v *= sign_;
  for (auto& v : incr_) v *= sign_;
}

std::shared_ptr<const FractionalKernel> fractional_kernel(double alpha, Eigen::Index cells) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const FractionalKernel>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(alpha); it != cache.end() && it->second->cells() >= cells) return it->second;
  }
  Eigen::Index size = 64;
  while (size < cells) size *= 2;
  auto k = std::make_shared<const FractionalKernel>(alpha, size);
  std::lock_guard lock(mutex);
  auto& slot = cache[alpha];
  if (!slot || slot->cells() < k->cells()) slot = k;
  return slot;
}

double integral_sign(double alpha) { return fractional_kernel(alpha, 1)->sign(); }

namespace {

struct Window {
  Eigen::Index g_first;
  Eigen::Index w_first;
  Eigen::Index cells;
};

Window locate(const IntegrandPath& g, const SampledPath& omega, const HolderParams& params,
              double s, double t) {
  params.validate();
  if (!(s < t)) throw std::invalid_argument("pathwise_integral: need s < t");
  if (std::abs(g.dt() - omega.dt()) > 1e-12 * omega.dt())
    throw std::invalid_argument("pathwise_integral: integrand and driver grids differ");
  if (g.cols() != omega.n_modes())
    throw std::invalid_argument("pathwise_integral: integrand columns must match driver modes");
  const auto ga = g.index_of(s), gb = g.index_of(t);
  const auto wa = omega.index_of(s), wb = omega.index_of(t);
  if (gb - ga != wb - wa) throw std::invalid_argument("pathwise_integral: grid mismatch");
  return {ga, wa, wb - wa};
}

}  // namespace

SpectralField pathwise_integral(const IntegrandPath& g, const SampledPath& omega,
                                const HolderParams& params, double s, double t) {
  const auto win = locate(g, omega, params, s, t);
  const auto kernel = fractional_kernel(params.alpha, win.cells);
  const Eigen::Index m = win.cells;
  const int n = omega.n_modes();
  Eigen::VectorXd v0(n);
  Eigen::MatrixXd v(n, m);
  const auto w0 = kernel->start_weights();
  const auto w1 = kernel->increment_weights();
  for (int i = 0; i < n; ++i) {
    const auto w = omega.mode(i);
    double acc0 = 0.0;
    for (Eigen::Index l = 0; l < m; ++l) {
      acc0 += (w[win.w_first + l + 1] - w[win.w_first + l]) * w0[l];
    }
    v0(i) = acc0;
    for (Eigen::Index p = 0; p < m; ++p) {
      double acc = 0.0;
      for (Eigen::Index l = p; l < m; ++l) {
        acc += (w[win.w_first + l + 1] - w[win.w_first + l]) * w1[l - p];
      }
      v(i, p) = acc;
    }
  }
  SpectralField out = g.value(win.g_first) * v0;
  for (Eigen::Index p = 0; p < m; ++p) {
    out.noalias() += (g.value(win.g_first + p + 1) - g.value(win.g_first + p)) * v.col(p);
  }
  return out;
}

double pathwise_integral(const SampledPath& g, const SampledPath& omega, const HolderParams& params,
                         double s, double t) {
  if (omega.n_modes() != 1) throw std::invalid_argument("pathwise_integral: scalar form needs one mode");
  return pathwise_integral(IntegrandPath::from_scalar(g), omega, params, s, t)(0);
}

SpectralField pathwise_integral_reference(const IntegrandPath& g, const SampledPath& omega,
                                          const HolderParams& params, double s, double t) {
  const auto win = locate(g, omega, params, s, t);
  const double alpha = params.alpha;
  const double dt = omega.dt();
  const auto rule = TanhSinhRule::make(1.0 / 6.0, std::min(1.0 - alpha, alpha));
  const Eigen::Index m = win.cells;
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const int n = omega.n_modes();

  // D^{1-alpha} of each driver mode at every quadrature node, windowed to [s, t]
  Eigen::MatrixXd right(m * nq, n);
  for (int i = 0; i < n; ++i) {
    const auto w = omega.mode(i).subspan(static_cast<std::size_t>(win.w_first), static_cast<std::size_t>(m + 1));
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index q = 0; q < nq; ++q) {
        right(k * nq + q, i) = right_derivative(w, dt, alpha, m, {k, rule.x[q], rule.xc[q]});
      }
    }
  }
  SpectralField out = SpectralField::Zero(g.rows());
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < n; ++i) {
      const auto full = g.entry_series(j, i);
      const std::span<const double> series(full.data() + win.g_first, static_cast<std::size_t>(m + 1));
      double acc = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index q = 0; q < nq; ++q) {
          const double left = left_derivative(series, dt, alpha, 0, {k, rule.x[q], rule.xc[q]});
          acc += rule.w[q] * dt * left * right(k * nq + q, i);
        }
      }
      out(j) += acc;
    }
  }
  return integral_sign(alpha) * out;
}

// ---------------------------------------------------------------------------

CumulativeIntegrator::CumulativeIntegrator(const SampledPath& omega, double alpha) {
  const Eigen::Index n = omega.n_steps();
  kernel_ = fractional_kernel(alpha, n);
  increments_ = omega.values().bottomRows(n) - omega.values().topRows(n);
  start_ = Eigen::VectorXd::Zero(omega.n_modes());
  incr_ = Eigen::MatrixXd::Zero(n, omega.n_modes());
}

void CumulativeIntegrator::advance() {
  const Eigen::Index b = position_;
  if (b >= increments_.rows()) throw std::out_of_range("CumulativeIntegrator: end of driver");
  const auto w0 = kernel_->start_weights();
  const auto w1 = kernel_->increment_weights();
  for (Eigen::Index i = 0; i < increments_.cols(); ++i) {
    const double dw = increments_(b, i);
    double* col = incr_.col(i).data();
    for (Eigen::Index p = 0; p < b; ++p) col[p] += dw * w1[b - p];
    col[b] = dw * w1[0];
    start_(i) += dw * w0[b];
  }
  ++position_;
}

double right_derivative_bound_constant(const HolderParams& params) {
  const double a = params.alpha;
  return (1.0 + (1.0 - a) / (a + params.beta_prime - 1.0)) / std::tgamma(a);
}

double integral_bound_constant(const HolderParams& params) {
  const double a = params.alpha;
  const double left = (1.0 + a * beta_fn(1.0 - params.beta, params.beta - a)) / std::tgamma(1.0 - a);
  return left * right_derivative_bound_constant(params) * beta_fn(1.0 - a, a + params.beta_prime);
}

}  // namespace pathwise
