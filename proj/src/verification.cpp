#include "pathwise/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace pathwise {

namespace {

constexpr double kPi = 3.14159265358979323846;

SampledPath subsample(const SampledPath& p, int factor) {
  const Eigen::Index n = p.n_steps() / factor;
  Eigen::MatrixXd v(n + 1, p.n_modes());
  for (Eigen::Index j = 0; j <= n; ++j) v.row(j) = p.values().row(j * factor);
  return SampledPath(p.dt() * factor, std::move(v), p.start_step() / factor);
}

SampledPath constant_path(double dt, Eigen::Index n_steps, double c) {
  return SampledPath(dt, Eigen::MatrixXd::Constant(n_steps + 1, 1, c), 0);
}

}  // namespace

double CheckResult::get(const std::string& name) const {
  for (const auto& [k, v] : measured) {
    if (k == name) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

CheckResult check_semigroup(const SpectralOperator& op, double beta) {
  CheckResult r{"semigroup", "semigroup envelope and smoothing estimates", false, {}, ""};
  std::vector<double> grid;
  for (int k = 1; k <= 256; ++k) grid.push_back(k / 64.0);
  const auto rep = verify_semigroup_bounds(op, 0.5, grid, beta);
  r.add("measured_cs_gamma_0.5", rep.measured_cs);
  r.add("max_envelope_ratio", rep.max_envelope_ratio);
  bool ok = rep.envelope_holds;
  for (const auto& e : rep.eq2) {
    std::ostringstream name;
    name << "eq2_theta_" << e.theta << "_sigma_" << e.sigma;
    r.add(name.str(), e.measured_constant);
    ok = ok && e.within_unit_bound;
  }
  r.pass = ok;
  return r;
}

CheckResult check_fbm_exactness(const std::vector<double>& hursts, int n_steps, double tol) {
  CheckResult r{"fbm_exactness", "grid covariance of the fBm sampler", true, {}, ""};
  const double dt = 1.0 / n_steps;
  for (const double h : hursts) {
    const auto f = fbm_factor(h, n_steps, dt);
    double formula_err = 0.0;
    const auto n = static_cast<Eigen::Index>(f->times.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double t = f->times[i], s = f->times[j];
        const double c = 0.5 * (std::pow(std::abs(t), 2 * h) + std::pow(std::abs(s), 2 * h) -
                                std::pow(std::abs(t - s), 2 * h));
        formula_err = std::max(formula_err, std::abs(f->covariance(i, j) - c));
      }
    }
    const double rec = f->reconstruction_error();
    std::ostringstream a, b;
    a << "H_" << h << "_covariance_error";
    b << "H_" << h << "_factor_error";
    r.add(a.str(), formula_err);
    r.add(b.str(), rec);
    r.pass = r.pass && formula_err <= tol && rec <= tol;
  }
  return r;
}

CheckResult check_constant_integrand(const HolderParams& params, int samples, int n_steps, std::uint64_t seed,
                                     double tol) {
  CheckResult r{"constant_integrand", "integral of a constant equals c times the increment", false, {}, ""};
  const double dt = 1.0 / n_steps;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const auto w = sample_fbm_1d(params.hurst, n_steps, dt, mix_seed(seed, static_cast<std::uint64_t>(k)));
    const double c = (k % 2 ? -1.0 : 1.0) * (0.5 + 0.25 * k);
    const auto g = constant_path(dt, n_steps, c);
    const double value = pathwise_integral(g, w, params, 0.0, 1.0);
    const double exact = c * (w.values()(n_steps, 0) - w.values()(0, 0));
    const double scale = std::abs(c) * holder_seminorm(w, params.beta_prime);
    worst = std::max(worst, std::abs(value - exact) / scale);
  }
  r.add("max_relative_defect", worst);
  r.add("sign", integral_sign(params.alpha));
  r.pass = worst <= tol;
  return r;
}

CheckResult check_young_agreement(const HolderParams& params, const std::vector<int>& pows, double tol) {
  CheckResult r{"young_agreement", "g(r) = r against omega(r) = r^2 on [0, 1]", false, {}, ""};
  std::vector<double> errs;
  for (const int k : pows) {
    const int n = 1 << k;
    const double dt = 1.0 / n;
    Eigen::MatrixXd g(n + 1, 1), w(n + 1, 1);
    for (int j = 0; j <= n; ++j) {
      g(j, 0) = j * dt;
      w(j, 0) = (j * dt) * (j * dt);
    }
    const double v = pathwise_integral(SampledPath(dt, g), SampledPath(dt, w), params, 0.0, 1.0);
    errs.push_back(std::abs(v - 2.0 / 3.0));
    r.add("error_n_2^" + std::to_string(k), errs.back());
  }
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < errs.size(); ++k) {
    order = std::min(order, std::log2(errs[k - 1] / errs[k]) / (pows[k] - pows[k - 1]));
  }
  r.add("min_order", order);
  r.pass = errs.back() <= tol && order >= 1.0;
  return r;
}

CheckResult check_additivity_shift(const HolderParams& params, int triples, int shifts, int n_side,
                                   std::uint64_t seed, double tol) {
  CheckResult r{"additivity_shift", "additivity over subintervals and Wiener-shift invariance", false, {}, ""};
  const double dt = 1.0 / n_side;
  const auto w = sample_fbm_two_sided(params.hurst, n_side, dt, mix_seed(seed, 1));
  const auto g = sample_fbm_two_sided(params.hurst, n_side, dt, mix_seed(seed, 2));
  const auto G = IntegrandPath::from_scalar(g);
  std::mt19937_64 rng(mix_seed(seed, 3));
  std::uniform_int_distribution<int> node(-n_side, n_side);
  auto scale = [&](double s, double t) {
    double sup = 0.0;
    for (auto j = g.index_of(s); j <= g.index_of(t); ++j) sup = std::max(sup, std::abs(g.values()(j, 0)));
    return std::max(sup, 1e-12) * holder_seminorm(w, params.beta_prime, s, t) * std::pow(t - s, params.beta_prime);
  };
  double add_worst = 0.0;
  for (int k = 0; k < triples; ++k) {
    int a = node(rng), b = node(rng), c = node(rng);
    std::array<int, 3> v{a, b, c};
    std::sort(v.begin(), v.end());
    if (v[0] == v[1] || v[1] == v[2]) {
      --k;
      continue;
    }
    const double s = v[0] * dt, tau = v[1] * dt, t = v[2] * dt;
    const double whole = pathwise_integral(G, w, params, s, t)(0);
    const double parts = pathwise_integral(G, w, params, s, tau)(0) + pathwise_integral(G, w, params, tau, t)(0);
    add_worst = std::max(add_worst, std::abs(whole - parts) / scale(s, t));
  }
  std::uniform_int_distribution<int> shift(-n_side / 2, n_side / 2);
  double shift_worst = 0.0;
  for (int k = 0; k < shifts; ++k) {
    const int tau = shift(rng);
    const int lo = std::max(-n_side, -n_side + tau), hi = std::min(n_side, n_side + tau);
    std::uniform_int_distribution<int> in(lo, hi);
    int a = in(rng), b = in(rng);
    if (a == b) {
      --k;
      continue;
    }
    if (a > b) std::swap(a, b);
    const double s = a * dt, t = b * dt;
    const double direct = pathwise_integral(G, w, params, s, t)(0);
    const auto wt = wiener_shift(w, tau);
    const SampledPath gt(dt, g.values(), g.start_step() - tau);
    const double moved =
        pathwise_integral(IntegrandPath::from_scalar(gt), wt, params, (a - tau) * dt, (b - tau) * dt)(0);
    shift_worst = std::max(shift_worst, std::abs(direct - moved) / scale(s, t));
  }
  r.add("max_additivity_defect", add_worst);
  r.add("max_shift_defect", shift_worst);
  r.note = "defects relative to sup|g| |||omega|||_{beta'} (t-s)^{beta'}";
  r.pass = add_worst <= tol && shift_worst <= tol;
  return r;
}

CheckResult check_kummer(const HolderParams& params, double T) {
  CheckResult r{"kummer", "decay of K(rho) for (a, b, d) = (-alpha, alpha - 1, beta' - beta)", false, {}, ""};
  const double a = -params.alpha, b = params.alpha - 1.0, d = params.beta_prime - params.beta;
  const double k0 = kummer_K(0.0, a, b, d, T);
  const double beta_fn =
      std::exp(std::lgamma(1.0 - params.alpha) + std::lgamma(params.alpha)) * std::pow(T, d);
  r.add("K_0", k0);
  r.add("K_0_error", std::abs(k0 - beta_fn));
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  double k1 = 0.0, klast = 0.0;
  for (const double rho : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
    const double v = kummer_K(rho, a, b, d, T);
    std::ostringstream name;
    name << "K_" << rho;
    r.add(name.str(), v);
    decreasing = decreasing && v < prev;
    prev = v;
    if (rho == 1.0) k1 = v;
    klast = v;
  }
  r.add("ratio_K_1e4_over_K_1", klast / k1);
  r.add("strictly_decreasing", decreasing ? 1.0 : 0.0);
  const bool decay = klast < 0.05 * k1;
  r.pass = decreasing && decay && std::abs(k0 - beta_fn) <= 1e-6;
  if (!decay) r.note = "K decays like rho^-(beta'-beta); the 0.05 ratio is out of reach on this rho range";
  return r;
}

CheckResult check_fixed_point(const ProblemSpec& spec, const SpectralField& u0, const SolverConfig& cfg,
                              std::uint64_t seed) {
  CheckResult r{"fixed_point", "Picard iteration on the heat example", false, {}, ""};
  const auto w = sample_qfbm(spec.op, spec.params.hurst, spec.n_steps, spec.dt(), seed);
  try {
    const auto set = solve_mild(u0, w, spec, cfg);
    double worst_ratio = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const int k : set.converged_starts) {
      const auto& h = set.residual_history[static_cast<std::size_t>(k)];
      best = std::min(best, h.back());
      for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i - 1] > 10.0 * cfg.fp_tol) worst_ratio = std::max(worst_ratio, h[i] / h[i - 1]);
      }
    }
    const auto& h0 = set.residual_history.front();
    r.add("rho", set.rho);
    r.add("probe_contraction", set.probe_contraction);
    r.add("max_residual_ratio", worst_ratio);
    r.add("best_weighted_residual", best);
    r.add("max_weighted_residual", *std::max_element(set.residuals.begin(), set.residuals.end()));
    r.add("max_unweighted_residual",
          *std::max_element(set.unweighted_residuals.begin(), set.unweighted_residuals.end()));
    r.add("iterations_start_0", static_cast<double>(h0.size()));
    r.add("distinct_solutions", static_cast<double>(set.elements.size()));
    r.add("converged_starts", static_cast<double>(set.converged_starts.size()));
    r.add("c_S", set.c_S);
    r.add("ball_radius", set.ball_radius);
    const bool in_ball = std::all_of(set.in_ball.begin(), set.in_ball.end(), [](bool b) { return b; });
    r.add("all_in_ball", in_ball ? 1.0 : 0.0);
    const double max_res = *std::max_element(set.residuals.begin(), set.residuals.end());
    r.pass = max_res < cfg.fp_tol && worst_ratio <= cfg.contraction_target + 0.05;
  } catch (const SolverError& e) {
    r.note = e.what();
  }
  return r;
}

CheckResult check_additive_oracle(const HolderParams& params, int n_steps, std::uint64_t seed, double tol_smooth,
                                  double tol_fbm) {
  CheckResult r{"additive_oracle", "scalar additive noise against a Riemann-Stieltjes oracle", false, {}, ""};
  const double lam = 1.0, sigma = 0.7, u0v = 0.8;
  ProblemSpec spec;
  spec.op = SpectralOperator(Eigen::VectorXd::Constant(1, lam), Eigen::VectorXd::Ones(1));
  spec.diffusion = [sigma](const SpectralField&) { return HSMatrix::Constant(1, 1, sigma); };
  spec.c_G = sigma;
  spec.params = params;
  spec.horizon = 1.0;
  spec.n_steps = n_steps;
  SolverConfig cfg;
  cfg.n_starts = 1;
  const SpectralField u0 = SpectralField::Constant(1, u0v);
  const double dt = 1.0 / n_steps;

  auto max_error = [&](const SampledPath& coarse, const SampledPath& fine) {
    const auto set = solve_mild(u0, coarse, spec, cfg);
    const auto& u = set.elements.front();
    const int f = static_cast<int>(fine.n_steps() / coarse.n_steps());
    const double h = fine.dt();
    double worst = 0.0;
    for (Eigen::Index b = 0; b <= coarse.n_steps(); ++b) {
      const double t = b * dt;
      double acc = 0.0;
      for (Eigen::Index k = 0; k < b * f; ++k) {
        const double mid = (k + 0.5) * h;
        acc += std::exp(-lam * (t - mid)) * (fine.values()(k + 1, 0) - fine.values()(k, 0));
      }
      const double oracle = std::exp(-lam * t) * u0v + sigma * acc;
      worst = std::max(worst, std::abs(u.values()(b, 0) - oracle));
    }
    return worst;
  };

  auto smooth = [](double t) { return 0.5 * std::sin(2.0 * kPi * t) + t * t; };
  Eigen::MatrixXd wc(n_steps + 1, 1), wf(4 * n_steps + 1, 1);
  for (int j = 0; j <= n_steps; ++j) wc(j, 0) = smooth(j * dt);
  for (int j = 0; j <= 4 * n_steps; ++j) wf(j, 0) = smooth(j * dt / 4.0);
  const double e_smooth = max_error(SampledPath(dt, wc), SampledPath(dt / 4.0, wf));

  const auto coarse = sample_fbm_1d(params.hurst, n_steps, dt, seed);
  const auto fine = refine_fbm_midpoints(refine_fbm_midpoints(coarse, params.hurst, mix_seed(seed, 11)),
                                         params.hurst, mix_seed(seed, 12));
  const double e_fbm = max_error(coarse, fine);
  r.add("max_error_smooth", e_smooth);
  r.add("max_error_fbm", e_fbm);
  r.pass = e_smooth <= tol_smooth && e_fbm <= tol_fbm;
  return r;
}

CheckResult check_cocycle_suite(const std::function<ProblemSpec(int)>& make_spec, const SpectralField& u0,
                                const SolverConfig& cfg, const std::vector<std::pair<double, double>>& pairs,
                                int n_steps, std::uint64_t seed, double tol) {
  CheckResult r{"cocycle", "strict cocycle property on the heat example", true, {}, ""};
  const ProblemSpec coarse_spec = make_spec(n_steps);
  const ProblemSpec fine_spec = make_spec(2 * n_steps);
  const auto fine = sample_qfbm(fine_spec.op, fine_spec.params.hurst, 2 * n_steps, fine_spec.dt(), seed);
  const auto coarse = subsample(fine, 2);
  const double floor = 2.0 * cfg.fp_tol;
  bool literal_order = true;
  for (const auto& [t, s] : pairs) {
    const auto c = check_cocycle(t, s, coarse, u0, coarse_spec, cfg);
    const auto f = check_cocycle(t, s, fine, u0, fine_spec, cfg);
    std::ostringstream tag;
    tag << "t_" << t << "_s_" << s;
    r.add(tag.str() + "_d1_n", c.d1);
    r.add(tag.str() + "_d2_n", c.d2);
    r.add(tag.str() + "_d1_2n", f.d1);
    r.add(tag.str() + "_d2_2n", f.d2);
    const double dn = std::max(c.d1, c.d2), d2n = std::max(f.d1, f.d2);
    const bool halves = d2n <= 0.5 * dn;
    const bool at_floor = dn <= floor && d2n <= floor;
    literal_order = literal_order && halves;
    r.pass = r.pass && dn <= tol && (halves || at_floor);
  }
  r.add("literal_halving_everywhere", literal_order ? 1.0 : 0.0);
  r.add("solver_floor", floor);
  r.note = "order check passes when the defect halves or both defects are below 2 fp_tol";
  return r;
}

CheckResult check_usc(const ProblemSpec& spec, const SpectralField& u0, const SolverConfig& cfg, double t,
                      const std::vector<double>& radii, int samples, std::uint64_t seed, bool perturb_driver) {
  CheckResult r{"usc", "upper semicontinuity probe of u0 -> Phi(t, omega, u0)", false, {}, ""};
  const auto w = sample_qfbm(spec.op, spec.params.hurst, spec.n_steps, spec.dt(), seed);
  UscOptions opt;
  opt.samples_per_radius = samples;
  opt.perturb_driver = perturb_driver;
  opt.tolerance = 10.0 * 2.0 * cfg.fp_tol;
  opt.seed = mix_seed(seed, 99);
  try {
    const auto rep = usc_probe(t, w, u0, spec, cfg, radii, opt);
    for (std::size_t k = 0; k < rep.radii.size(); ++k) {
      std::ostringstream name;
      name << "e_r_" << rep.radii[k];
      r.add(name.str(), rep.errors[k]);
      r.add(name.str() + "_failures", rep.failures[k]);
    }
    r.add("monotone", rep.monotone ? 1.0 : 0.0);
    r.add("tolerance", rep.tolerance);
    r.pass = rep.monotone && rep.smallest_within_tolerance;
    if (!rep.smallest_within_tolerance) r.note = "e(r) scales linearly with r; the 10 floor bound needs r near fp_tol";
  } catch (const SolverError& e) {
    r.note = e.what();
  }
  return r;
}

CheckResult check_holder_statistics(double hurst, double beta, int seeds, int n_steps, std::uint64_t seed,
                                    int required) {
  CheckResult r{"holder_statistics", "Hoelder seminorm and Wiener modulus of fBm samples", false, {}, ""};
  int decreasing = 0;
  bool finite = true;
  double max_seminorm = 0.0;
  for (int k = 0; k < seeds; ++k) {
    const auto w = sample_fbm_1d(hurst, n_steps, 1.0 / n_steps, mix_seed(seed, static_cast<std::uint64_t>(k)));
    const double sem = holder_seminorm(w, beta);
    finite = finite && std::isfinite(sem);
    max_seminorm = std::max(max_seminorm, sem);
    if (wiener_modulus(w, beta, std::ldexp(1.0, -6)).value < wiener_modulus(w, beta, 0.25).value) ++decreasing;
  }
  r.add("max_seminorm", max_seminorm);
  r.add("modulus_decreasing_count", decreasing);
  r.add("seeds", seeds);
  r.pass = finite && decreasing >= required;
  return r;
}

CheckResult check_hs_lipschitz(const KernelSpec& kernel, int n_modes, int pairs, std::uint64_t seed) {
  CheckResult r{"hs_lipschitz", "Hilbert-Schmidt Lipschitz bound of the kernel operator", false, {}, ""};
  const KernelOperator op(kernel, n_modes);
  const auto c = check_hs_lipschitz(op, pairs, seed, 1e-6);
  r.add("lipschitz_norm_L", op.lipschitz_norm());
  r.add("violations", c.violations);
  r.add("worst_ratio", c.worst_ratio);
  r.pass = c.violations == 0;
  return r;
}

}  // namespace pathwise
