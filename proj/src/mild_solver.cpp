#include "pathwise/mild_solver.hpp"

#include "pathwise/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace pathwise {

void ProblemSpec::validate() const {
  params.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("ProblemSpec: horizon must be positive");
  if (n_steps < 2) throw std::invalid_argument("ProblemSpec: n_steps must be at least 2");
  if (c_F < 0.0 || L_F < 0.0 || c_G < 0.0 || L_G < 0.0)
    throw std::invalid_argument("ProblemSpec: growth constants must be nonnegative");
}

SpectralField ProblemSpec::eval_drift(const SpectralField& u) const {
  if (!drift) return SpectralField::Zero(u.size());
  SpectralField f = drift(u);
  if (f.size() != u.size()) throw std::invalid_argument("ProblemSpec: drift returned wrong size");
  return f;
}

HSMatrix ProblemSpec::eval_diffusion(const SpectralField& u) const {
  if (!diffusion) return HSMatrix::Zero(u.size(), u.size());
  HSMatrix g = diffusion(u);
  if (g.rows() != u.size() || g.cols() != u.size())
    throw std::invalid_argument("ProblemSpec: diffusion returned wrong shape");
  return g;
}

ConstantCheck check_declared_constants(const ProblemSpec& spec, int samples, std::uint64_t seed,
                                       double slack) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> mag(-2.0, 1.0);
  const int n = spec.n_modes();
  auto random_field = [&] {
    SpectralField u(n);
    for (int i = 0; i < n; ++i) u(i) = normal(rng);
    return SpectralField(u * (std::pow(10.0, mag(rng)) / std::max(u.norm(), 1e-300)));
  };
  ConstantCheck out;
  out.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const SpectralField u = random_field();
    const SpectralField v = random_field();
    const double fu = spec.eval_drift(u).norm();
    const double fb = spec.c_F + spec.L_F * u.norm();
    if (fu > fb + slack) ++out.drift_violations;
    if (fb > 0.0) out.worst_drift_ratio = std::max(out.worst_drift_ratio, fu / fb);
    const double gd = (spec.eval_diffusion(u) - spec.eval_diffusion(v)).norm();
    const double gb = spec.L_G * (u - v).norm();
    if (gd > gb + slack) ++out.diffusion_violations;
    if (gb > 0.0) out.worst_diffusion_ratio = std::max(out.worst_diffusion_ratio, gd / gb);
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(fp_tol > 0.0)) throw std::invalid_argument("SolverConfig: fp_tol must be positive");
  if (!(distinct_tol > fp_tol)) throw std::invalid_argument("SolverConfig: distinct_tol must exceed fp_tol");
  if (max_iters < 1 || n_starts < 1) throw std::invalid_argument("SolverConfig: need max_iters, n_starts >= 1");
  if (rho < 0.0 || !(rho_start > 0.0) || rho_cap < rho_start)
    throw std::invalid_argument("SolverConfig: invalid rho range");
  if (!(contraction_target > 0.0 && contraction_target < 1.0))
    throw std::invalid_argument("SolverConfig: contraction_target must lie in (0,1)");
}

// ---------------------------------------------------------------------------

namespace {

// int_lo^hi e^{-x w} w^b (1-w)^a dw with the endpoint complements kept exact.
double kummer_piece(const TanhSinhRule& rule, double x, double a, double b, double lo, double hi) {
  const double len = hi - lo;
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = lo + len * rule.x[q];
    const double wc = (1.0 - hi) + len * rule.xc[q];
    acc += rule.w[q] * std::exp(-x * w) * std::pow(w, b) * std::pow(wc, a);
  }
  return len * acc;
}

double kummer_inner(const TanhSinhRule& rule, double x, double a, double b) {
  if (x <= 1.0) return kummer_piece(rule, x, a, b, 0.0, 1.0);
  double total = 0.0;
  double lo = 0.0;
  double hi = 1.0 / x;
  while (lo < 1.0 && x * lo <= 80.0) {
    total += kummer_piece(rule, x, a, b, lo, std::min(hi, 1.0));
    lo = hi;
    hi *= 2.0;
  }
  return total;
}

}  // namespace

double kummer_K(double rho, double a, double b, double d, double T) {
  if (!(a > -1.0 && b > -1.0 && a + b >= -1.0 - 1e-12))
    throw std::invalid_argument("kummer_K: need a, b > -1 and a + b >= -1");
  if (!(d > 0.0) || !(T > 0.0) || rho < 0.0) throw std::invalid_argument("kummer_K: need d, T > 0, rho >= 0");
  const auto rule = TanhSinhRule::make(1.0 / 8.0, std::min(a, b) + 1.0);
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::pow(t, d) * kummer_inner(rule, rho * t, a, b); };
  if (rho == 0.0) return f(T);

  std::vector<double> grid;
  for (int k = 1; k <= 100; ++k) grid.push_back(T * k / 100.0);
  for (int k = 0; k < 100; ++k) grid.push_back(T * std::pow(10.0, -10.0 + 10.0 * k / 100.0));
  std::sort(grid.begin(), grid.end());
  std::size_t best = 0;
  double fbest = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (v > fbest) {
      fbest = v;
      best = k;
    }
  }
  double lo = best > 0 ? grid[best - 1] : 0.0;
  double hi = best + 1 < grid.size() ? grid[best + 1] : T;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-14 * T; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({fbest, f1, f2});
}

// ---------------------------------------------------------------------------

namespace {

// dt * int_0^1 e^{-z u} u du and dt * int_0^1 e^{-z u} (1-u) du
void exp_moments(double z, double dt, double& old_w, double& new_w) {
  double phi1, phi2;
  if (z < 0.1) {
    phi1 = 0.0;
    phi2 = 0.0;
    double term = 1.0;  // (-z)^k / k!
    for (int k = 0; k < 14; ++k) {
      phi1 += term / (k + 1);
      phi2 += term / (k + 2);
      term *= -z / (k + 1);
    }
  } else {
    phi1 = -std::expm1(-z) / z;
    phi2 = (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
  }
  old_w = dt * phi2;
  new_w = dt * (phi1 - phi2);
}

}  // namespace

MildOperator::MildOperator(const ProblemSpec& spec, const SampledPath& omega)
    : spec_(spec), omega_(omega) {
  spec_.validate();
  if (omega_.start_step() != 0) throw std::invalid_argument("MildOperator: driver must start at t = 0");
  if (omega_.n_modes() != spec_.n_modes())
    throw std::invalid_argument("MildOperator: driver modes must match the operator");
  const Eigen::Index n = omega_.n_steps();
  const int N = spec_.n_modes();
  const double dt = omega_.dt();
  const auto& lam = spec_.op.eigenvalues();

  decay_.resize(n + 1, N);
  for (Eigen::Index d = 0; d <= n; ++d) {
    for (int j = 0; j < N; ++j) decay_(d, j) = std::exp(-lam(j) * static_cast<double>(d) * dt);
  }
  phi_old_.resize(N);
  phi_new_.resize(N);
  for (int j = 0; j < N; ++j) exp_moments(lam(j) * dt, dt, phi_old_(j), phi_new_(j));

  if (spec_.diffusion) {
    CumulativeIntegrator acc(omega_, spec_.params.alpha);
    start_.reserve(static_cast<std::size_t>(n + 1));
    incr_.reserve(static_cast<std::size_t>(n + 1));
    start_.push_back(Eigen::VectorXd::Zero(N));
    incr_.push_back(Eigen::MatrixXd(N, 0));
    for (Eigen::Index b = 1; b <= n; ++b) {
      acc.advance();
      Eigen::VectorXd s(N);
      Eigen::MatrixXd v(N, b);
      for (int i = 0; i < N; ++i) {
        s(i) = acc.start_weight(i);
        const auto w = acc.increment_weights(i);
        for (Eigen::Index p = 0; p < b; ++p) v(i, p) = w[static_cast<std::size_t>(p)];
      }
      start_.push_back(std::move(s));
      incr_.push_back(std::move(v));
    }
  }
}

Eigen::MatrixXd MildOperator::noise_term(const std::vector<HSMatrix>& g) const {
  const Eigen::Index n = omega_.n_steps();
  const int N = spec_.n_modes();
  if (static_cast<Eigen::Index>(g.size()) != n + 1)
    throw std::invalid_argument("MildOperator: integrand needs one value per node");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, N);
  if (!spec_.diffusion) return out;
  Eigen::VectorXd y(N), z(N);
  for (Eigen::Index b = 1; b <= n; ++b) {
    // integrand h_p = S(t_b - t_p) G_p, piecewise linear between nodes
    Eigen::VectorXd acc = decay_.row(b).transpose().cwiseProduct(g[0] * start_[b]);
    const Eigen::MatrixXd& v = incr_[b];
    for (Eigen::Index p = 0; p < b; ++p) {
      y.noalias() = g[p + 1] * v.col(p);
      z.noalias() = g[p] * v.col(p);
      acc += decay_.row(b - p - 1).transpose().cwiseProduct(y) - decay_.row(b - p).transpose().cwiseProduct(z);
    }
    out.row(b) = acc.transpose();
  }
  return out;
}

Eigen::MatrixXd MildOperator::drift_term(const Eigen::MatrixXd& f) const {
  const Eigen::Index n = omega_.n_steps();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, spec_.n_modes());
  if (!spec_.drift) return out;
  for (Eigen::Index b = 0; b < n; ++b) {
    out.row(b + 1) = decay_.row(1).cwiseProduct(out.row(b)) + phi_old_.transpose().cwiseProduct(f.row(b)) +
                     phi_new_.transpose().cwiseProduct(f.row(b + 1));
  }
  return out;
}

SampledPath MildOperator::apply(const SampledPath& u, const SpectralField& u0) const {
  const Eigen::Index n = omega_.n_steps();
  const int N = spec_.n_modes();
  if (u.n_nodes() != n + 1 || u.n_modes() != N || std::abs(u.dt() - omega_.dt()) > 1e-12 * omega_.dt())
    throw std::invalid_argument("MildOperator: candidate path is not on the driver grid");
  if (u0.size() != N) throw std::invalid_argument("MildOperator: initial value has wrong size");
  Eigen::MatrixXd out(n + 1, N);
  for (Eigen::Index b = 0; b <= n; ++b) out.row(b) = decay_.row(b).cwiseProduct(u0.transpose());
  if (spec_.drift) {
    Eigen::MatrixXd f(n + 1, N);
    for (Eigen::Index b = 0; b <= n; ++b) f.row(b) = spec_.eval_drift(u.value(b)).transpose();
    out += drift_term(f);
  }
  if (spec_.diffusion) {
    std::vector<HSMatrix> g;
    g.reserve(static_cast<std::size_t>(n + 1));
    for (Eigen::Index b = 0; b <= n; ++b) g.push_back(spec_.eval_diffusion(u.value(b)));
    out += noise_term(g);
  }
  out.row(0) = u0.transpose();
  return SampledPath(omega_.dt(), std::move(out), 0);
}

SampledPath apply_T(const SampledPath& u, const SampledPath& omega, const SpectralField& u0,
                    const ProblemSpec& spec) {
  return MildOperator(spec, omega).apply(u, u0);
}

SampledPath path_difference(const SampledPath& a, const SampledPath& b) {
  if (!a.same_grid(b) || a.n_modes() != b.n_modes())
    throw std::invalid_argument("path_difference: paths live on different grids");
  return SampledPath(a.dt(), a.values() - b.values(), a.start_step());
}

double semigroup_holder_constant(const SpectralOperator& op, double beta, double dt, Eigen::Index n_steps) {
  const auto& lam = op.eigenvalues();
  Eigen::MatrixXd e(n_steps + 1, op.n_modes());
  for (Eigen::Index k = 0; k <= n_steps; ++k) e.row(k) = (-lam * (static_cast<double>(k) * dt)).array().exp().transpose();
  double hol = 0.0;
  for (Eigen::Index s = 1; s <= n_steps; ++s) {
    const double ws = std::pow(s * dt, beta);
    for (Eigen::Index t = s + 1; t <= n_steps; ++t) {
      const double diff = (e.row(s) - e.row(t)).cwiseAbs().maxCoeff();
      hol = std::max(hol, ws * diff / std::pow((t - s) * dt, beta));
    }
  }
  return 1.0 + hol;
}

std::vector<SpectralField> SolutionSet::values_at(Eigen::Index node) const {
  std::vector<SpectralField> out;
  out.reserve(elements.size());
  for (const auto& u : elements) out.push_back(u.value(node));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<SampledPath> initial_iterates(const SpectralField& u0, const SampledPath& omega,
                                          const ProblemSpec& spec, const SolverConfig& cfg) {
  const Eigen::Index n = omega.n_steps();
  const int N = spec.n_modes();
  const double dt = omega.dt();
  std::vector<SampledPath> starts;
  Eigen::MatrixXd constant = u0.transpose().replicate(n + 1, 1);
  starts.emplace_back(dt, constant, 0);
  if (cfg.n_starts == 1) return starts;
  Eigen::MatrixXd free(n + 1, N);
  for (Eigen::Index b = 0; b <= n; ++b) free.row(b) = semigroup_apply(spec.op, b * dt, u0).transpose();
  starts.emplace_back(dt, free, 0);
  // Hoelder perturbations of S(.)u0 that keep the initial value
  const SpectralOperator unit(spec.op.eigenvalues(), Eigen::VectorXd::Ones(N));
  for (int k = 2; k < cfg.n_starts; ++k) {
    const auto p = sample_qfbm(unit, spec.params.hurst, static_cast<int>(n), dt, mix_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    const double size = holder_beta_norm(p, spec.params.beta);
    const double scale = cfg.perturbation_scale * (1.0 + u0.norm()) / std::max(size, 1e-300);
    starts.emplace_back(dt, free + scale * p.values(), 0);
  }
  return starts;
}

double probe_quotient(const std::vector<SampledPath>& x, const std::vector<SampledPath>& tx, double beta,
                      double rho) {
  double q = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t l = k + 1; l < x.size(); ++l) {
      const double den = weighted_holder_norm(path_difference(x[k], x[l]), beta, rho);
      if (!(den > 1e-300)) continue;
      const double num = weighted_holder_norm(path_difference(tx[k], tx[l]), beta, rho);
      q = std::max(q, num / den);
    }
  }
  return q;
}

}  // namespace

SolutionSet solve_mild(const SpectralField& u0, const SampledPath& omega, const ProblemSpec& spec,
                       const SolverConfig& cfg) {
  cfg.validate();
  const MildOperator op(spec, omega);
  const double beta = spec.params.beta;
  const auto starts = initial_iterates(u0, omega, spec, cfg);
  std::vector<SampledPath> images;
  images.reserve(starts.size());
  for (const auto& s : starts) images.push_back(op.apply(s, u0));

  SolutionSet out;
  if (cfg.rho > 0.0) {
    out.rho = cfg.rho;
    out.probe_contraction = probe_quotient(starts, images, beta, out.rho);
  } else {
    double rho = cfg.rho_start;
    double q = probe_quotient(starts, images, beta, rho);
    while (q >= cfg.contraction_target && rho < cfg.rho_cap) {
      rho *= 2.0;
      q = probe_quotient(starts, images, beta, rho);
    }
    if (q >= cfg.contraction_target) {
      std::ostringstream msg;
      msg << "solve_mild: no contractive weight up to rho = " << cfg.rho_cap << " (factor " << q << ")";
      throw SolverError(msg.str(), {});
    }
    out.rho = rho;
    out.probe_contraction = q;
  }
  out.c_S = semigroup_holder_constant(spec.op, beta, omega.dt(), omega.n_steps());
  out.ball_radius = 1.0 + 2.0 * out.c_S * u0.norm();

  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::vector<double> history;
    SampledPath u = starts[k];
    SampledPath v = images[k];
    bool converged = false;
    double unweighted = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      const SampledPath diff = path_difference(v, u);
      const double r = weighted_holder_norm(diff, beta, out.rho);
      unweighted = weighted_holder_norm(diff, beta, 0.0);
      history.push_back(r);
      if (!std::isfinite(r) || !std::isfinite(unweighted) || unweighted > 1e100) break;
      if (r < cfg.fp_tol && unweighted < cfg.fp_tol) {
        converged = true;
        break;
      }
      u = std::move(v);
      v = op.apply(u, u0);
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
      if (history[i - 1] > 10.0 * cfg.fp_tol) {
        out.iterate_contraction = std::max(out.iterate_contraction, history[i] / history[i - 1]);
      }
    }
    out.residual_history.push_back(history);
    if (!converged) {
      ++out.failed_starts;
      continue;
    }
    out.converged_starts.push_back(static_cast<int>(k));
    bool distinct = true;
    for (const auto& e : out.elements) {
      if (holder_beta_norm(path_difference(u, e), beta) <= cfg.distinct_tol) {
        distinct = false;
        break;
      }
    }
    if (!distinct) continue;
    out.residuals.push_back(history.back());
    out.unweighted_residuals.push_back(unweighted);
    out.provenance.push_back(static_cast<int>(k));
    out.in_ball.push_back(weighted_holder_norm(u, beta, out.rho) <= out.ball_radius);
    out.elements.push_back(std::move(u));
  }
  if (out.elements.empty()) {
    throw SolverError("solve_mild: no start converged within " + std::to_string(cfg.max_iters) + " iterations",
                      out.residual_history);
  }
  return out;
}

// ---------------------------------------------------------------------------

double smoothing_norm(const SampledPath& u, const ProblemSpec& spec, double t, double delta) {
  if (!(delta >= 0.0 && delta < spec.params.beta_prime))
    throw std::invalid_argument("smoothing_norm: need 0 <= delta < beta'");
  return frac_power_norm(spec.op, delta, u.value(u.index_of(t)));
}

SmoothingProfile smoothing_profile(const SampledPath& u, const ProblemSpec& spec, double delta) {
  SmoothingProfile out;
  for (Eigen::Index j = 1; j < u.n_nodes(); ++j) {
    const double t = u.time(j) - u.t0();
    const double v = smoothing_norm(u, spec, u.time(j), delta);
    out.times.push_back(t);
    out.norms.push_back(v);
    out.measured_constant = std::max(out.measured_constant, std::pow(t, delta) * v);
  }
  return out;
}

SampledPath concatenate(const SampledPath& u1, const SampledPath& u2) {
  if (std::abs(u1.dt() - u2.dt()) > 1e-12 * u1.dt()) throw std::invalid_argument("concatenate: grids differ");
  if (u1.n_modes() != u2.n_modes()) throw std::invalid_argument("concatenate: mode counts differ");
  if ((u1.value(u1.n_nodes() - 1) - u2.value(0)).norm() > 1e-12)
    throw std::invalid_argument("concatenate: u2 does not start at the endpoint of u1");
  Eigen::MatrixXd v(u1.n_nodes() + u2.n_steps(), u1.n_modes());
  v.topRows(u1.n_nodes()) = u1.values();
  v.bottomRows(u2.n_steps()) = u2.values().bottomRows(u2.n_steps());
  return SampledPath(u1.dt(), std::move(v), u1.start_step());
}

ResidualReport fixed_point_residual(const SampledPath& u, const SampledPath& omega, const ProblemSpec& spec,
                                    double rho) {
  const SampledPath tu = MildOperator(spec, omega).apply(u, u.value(0));
  const SampledPath d = path_difference(tu, u);
  return {weighted_holder_norm(d, spec.params.beta, rho), weighted_holder_norm(d, spec.params.beta, 0.0)};
}

ResidualReport translate_check(const SampledPath& u, double s, const SampledPath& omega, const ProblemSpec& spec,
                               double rho) {
  const auto k = u.index_of(s);
  if (k >= u.n_steps()) throw std::out_of_range("translate_check: s must lie before the end of the window");
  const SampledPath v = u.restrict(k, u.n_nodes() - 1).rebased();
  const auto shift = static_cast<std::int64_t>(std::llround(s / omega.dt()));
  const SampledPath shifted = wiener_shift(omega, shift).forward_part();
  const SampledPath driver = shifted.restrict(0, v.n_steps());
  return fixed_point_residual(v, driver, spec, rho);
}

UniformBoundReport empirical_uniform_bound(const std::vector<SpectralField>& initial,
                                           const std::vector<SampledPath>& drivers, double r_hat,
                                           const ProblemSpec& spec, const SolverConfig& cfg) {
  UniformBoundReport out;
  for (const auto& omega : drivers) {
    if (holder_seminorm(omega, spec.params.beta_prime) > r_hat) {
      ++out.skipped_drivers;
      continue;
    }
    for (const auto& u0 : initial) {
      try {
        const auto set = solve_mild(u0, omega, spec, cfg);
        ++out.solves;
        for (const auto& u : set.elements) {
          out.max_norm = std::max(out.max_norm, holder_beta_norm(u, spec.params.beta));
        }
      } catch (const SolverError&) {
        ++out.failures;
      }
    }
  }
  return out;
}

}  // namespace pathwise
