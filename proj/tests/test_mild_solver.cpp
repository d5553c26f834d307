#include "pathwise/example_heat.hpp"
#include "pathwise/mild_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace pathwise;

namespace {

SpectralOperator scalar_op(double lambda = 1.0) {
  return SpectralOperator(Eigen::VectorXd::Constant(1, lambda), Eigen::VectorXd::Ones(1));
}

ProblemSpec scalar_spec(int n) {
  ProblemSpec spec;
  spec.op = scalar_op();
  spec.n_steps = n;
  return spec;
}

ProblemSpec heat_spec(int n, int modes) {
  return build_heat_problem(named_scalar_map("tanh"), default_heat_kernel(), HolderParams{}, 1.0, n, modes);
}

SpectralField heat_u0(int modes) {
  SpectralField u0 = SpectralField::Zero(modes);
  u0(0) = 1.0;
  u0(1) = 0.5;
  u0(2) = -0.3;
  return u0;
}

SolverConfig quick_config() {
  SolverConfig cfg;
  cfg.n_starts = 2;
  return cfg;
}

SampledPath constant_path(int n, double dt, const SpectralField& v) {
  Eigen::MatrixXd m(n + 1, v.size());
  for (int j = 0; j <= n; ++j) m.row(j) = v.transpose();
  return SampledPath(dt, m);
}

}  // namespace

TEST_CASE("problem and solver validation") {
  ProblemSpec spec = scalar_spec(16);
  CHECK_NOTHROW(spec.validate());
  spec.params.alpha = 0.2;
  CHECK_THROWS(spec.validate());
  spec = scalar_spec(0);
  CHECK_THROWS(spec.validate());

  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.contraction_target = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.n_starts = 0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.fp_tol = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("kummer constant") {
  // rho = 0: the integral is a Beta function
  CHECK(kummer_K(0.0, -0.6, -0.4, 0.1, 1.0) == doctest::Approx(std::numbers::pi / std::sin(0.4 * std::numbers::pi)).epsilon(1e-6));
  // a = b = 0: int_0^1 e^{-rho t (1-v)} dv = (1 - e^{-rho t}) / (rho t)
  const double rho = 5.0, d = 0.5;
  double best = 0.0;
  for (int k = 1; k <= 200000; ++k) {
    const double t = k / 200000.0;
    best = std::max(best, std::pow(t, d) * (1.0 - std::exp(-rho * t)) / (rho * t));
  }
  CHECK(kummer_K(rho, 0.0, 0.0, d, 1.0) == doctest::Approx(best).epsilon(1e-6));
  double prev = INFINITY;
  for (const double r : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    const double v = kummer_K(r, -0.5, -0.35, 0.1, 1.0);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS(kummer_K(-1.0, 0.0, 0.0, 0.1, 1.0));
  CHECK_THROWS(kummer_K(1.0, -1.0, 0.0, 0.1, 1.0));
}

TEST_CASE("apply_T special cases") {
  const int n = 64;
  const double dt = 1.0 / n;
  const auto heat = heat_spec(n, 8);
  ProblemSpec free = heat;
  free.drift = nullptr;
  free.diffusion = nullptr;
  const auto omega = sample_qfbm(heat.op, heat.params.hurst, n, dt, 3);
  const auto u0 = heat_u0(8);
  const auto u = sample_qfbm(heat.op, heat.params.hurst, n, dt, 4);
  const auto tu = apply_T(u, omega, u0, free);
  for (int b = 0; b <= n; ++b) CHECK((tu.value(b) - semigroup_apply(heat.op, b * dt, u0)).norm() <= 1e-14);

  // scalar lambda = 1, F(u) = u: the constant path is a fixed point
  ProblemSpec lin = scalar_spec(n);
  lin.drift = [](const SpectralField& v) { return v; };
  lin.L_F = 1.0;
  const SpectralField c = SpectralField::Constant(1, 0.8);
  const auto w1 = sample_fbm_1d(lin.params.hurst, n, dt, 5);
  const auto fixed = apply_T(constant_path(n, dt, c), w1, c, lin);
  CHECK((fixed.values().array() - 0.8).abs().maxCoeff() <= 1e-14);

  // constant drift f: D(t) = f (1 - e^{-lambda t}) / lambda
  ProblemSpec cst = scalar_spec(n);
  cst.op = scalar_op(3.0);
  cst.drift = [](const SpectralField&) { return SpectralField::Constant(1, 2.0); };
  cst.c_F = 2.0;
  const auto d = apply_T(constant_path(n, dt, SpectralField::Zero(1)), w1, SpectralField::Zero(1), cst);
  for (int b = 0; b <= n; ++b) CHECK(d.values()(b, 0) == doctest::Approx(2.0 * (1 - std::exp(-3.0 * b * dt)) / 3.0).epsilon(1e-13));
}

TEST_CASE("noise term equals the pathwise integral of S(t_b - .)G(u)") {
  const int n = 32;
  const double dt = 1.0 / n;
  const auto spec = heat_spec(n, 4);
  const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 8);
  const auto u = sample_qfbm(spec.op, spec.params.hurst, n, dt, 9);
  std::vector<HSMatrix> g;
  for (int p = 0; p <= n; ++p) g.push_back(spec.eval_diffusion(u.value(p)));
  const MildOperator op(spec, omega);
  const auto noise = op.noise_term(g);
  for (const int b : {1, 7, 20, n}) {
    std::vector<HSMatrix> h;
    for (int p = 0; p <= b; ++p) {
      const Eigen::VectorXd decay = (-(b - p) * dt * spec.op.eigenvalues().array()).exp();
      h.push_back(decay.asDiagonal() * g[static_cast<std::size_t>(p)]);
    }
    const auto ref = pathwise_integral(IntegrandPath(dt, h), omega, spec.params, 0.0, b * dt);
    CHECK((noise.row(b).transpose() - ref).norm() <= 1e-12 * (1.0 + ref.norm()));
  }
}

TEST_CASE("additive noise against a Riemann-Stieltjes oracle") {
  const int n = 256;
  const double dt = 1.0 / n;
  const double sigma = 0.7, u0 = 0.8;
  ProblemSpec spec = scalar_spec(n);
  spec.diffusion = [sigma](const SpectralField&) { return HSMatrix::Constant(1, 1, sigma); };
  spec.c_G = sigma;
  auto w = [](double r) { return 0.5 * std::sin(2 * std::numbers::pi * r) + r * r; };
  auto dw = [](double r) { return std::numbers::pi * std::cos(2 * std::numbers::pi * r) + 2 * r; };
  Eigen::MatrixXd wv(n + 1, 1);
  for (int j = 0; j <= n; ++j) wv(j, 0) = w(j * dt);
  const SampledPath omega(dt, wv);
  const auto sol = solve_mild(SpectralField::Constant(1, u0), omega, spec, quick_config());
  REQUIRE(sol.elements.size() == 1);
  double worst = 0.0;
  for (int b = 0; b <= n; b += 16) {
    const double t = b * dt;
    const int m = 20000;
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
      const double r = (k + 0.5) * t / m;
      acc += std::exp(-(t - r)) * dw(r) * t / m;
    }
    worst = std::max(worst, std::abs(sol.elements[0].values()(b, 0) - (std::exp(-t) * u0 + sigma * acc)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("solve_mild") {
  const int n = 64;
  const double dt = 1.0 / n;
  SUBCASE("F = G = 0 gives the semigroup orbit") {
    ProblemSpec spec = heat_spec(n, 8);
    spec.drift = nullptr;
    spec.diffusion = nullptr;
    const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 1);
    const auto sol = solve_mild(heat_u0(8), omega, spec, quick_config());
    REQUIRE(sol.elements.size() == 1);
    CHECK(sol.residuals[0] <= 1e-12);
    for (int b = 0; b <= n; ++b)
      CHECK((sol.elements[0].value(b) - semigroup_apply(spec.op, b * dt, heat_u0(8))).norm() <= 1e-13);
  }
  SUBCASE("heat example converges geometrically") {
    const auto spec = heat_spec(n, 8);
    const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 2);
    SolverConfig cfg;
    const auto sol = solve_mild(heat_u0(8), omega, spec, cfg);
    REQUIRE_FALSE(sol.elements.empty());
    CHECK(sol.elements.size() == 1);
    CHECK(sol.probe_contraction < cfg.contraction_target);
    CHECK(sol.iterate_contraction <= cfg.contraction_target + 0.05);
    for (std::size_t k = 0; k < sol.elements.size(); ++k) {
      CHECK(sol.residuals[k] < cfg.fp_tol);
      CHECK(sol.unweighted_residuals[k] < cfg.fp_tol);
      CHECK(sol.unweighted_residuals[k] <= std::exp(sol.rho) * cfg.fp_tol);
      CHECK(sol.in_ball[k]);
    }
    for (const auto& h : sol.residual_history)
      for (std::size_t k = 2; k < h.size(); ++k) CHECK(h[k] <= h[k - 1]);
    const auto res = fixed_point_residual(sol.elements[0], omega, spec, sol.rho);
    CHECK(res.weighted == doctest::Approx(sol.residuals[0]).epsilon(1e-6));
    const auto v = sol.values_at(n);
    CHECK(v.size() == sol.elements.size());

    const auto cc = check_declared_constants(spec, 50, 3);
    CHECK(cc.drift_violations == 0);
    CHECK(cc.diffusion_violations == 0);
  }
  SUBCASE("no convergence raises SolverError with a trace") {
    const auto spec = heat_spec(n, 8);
    const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 2);
    SolverConfig cfg = quick_config();
    cfg.max_iters = 1;
    cfg.fp_tol = 1e-15;
    try {
      (void)solve_mild(heat_u0(8), omega, spec, cfg);
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK_FALSE(e.residual_trace().empty());
    }
  }
}

TEST_CASE("smoothing norms") {
  const int n = 64;
  const double dt = 1.0 / n;
  ProblemSpec spec = heat_spec(n, 8);
  spec.drift = nullptr;
  spec.diffusion = nullptr;
  SpectralField e1 = SpectralField::Zero(8);
  e1(0) = 1.0;
  const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 1);
  const auto u = solve_mild(e1, omega, spec, quick_config()).elements[0];
  CHECK(smoothing_norm(u, spec, 0.5, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(smoothing_norm(u, spec, 0.5, 0.3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK_THROWS(smoothing_norm(u, spec, 0.5, spec.params.beta_prime));

  const auto heat = heat_spec(n, 8);
  const auto hs = solve_mild(heat_u0(8), sample_qfbm(heat.op, heat.params.hurst, n, dt, 3), heat, quick_config());
  const auto prof = smoothing_profile(hs.elements[0], heat, 0.3);
  CHECK(std::isfinite(prof.measured_constant));
  CHECK(prof.times.size() == prof.norms.size());
}

TEST_CASE("concatenation and translation") {
  const int n = 64;
  const double dt = 1.0 / n;
  const auto spec = heat_spec(n, 8);
  const auto omega = sample_qfbm(spec.op, spec.params.hurst, n, dt, 6);
  SolverConfig cfg = quick_config();
  const auto sol = solve_mild(heat_u0(8), omega, spec, cfg);
  const auto& u = sol.elements[0];

  const auto glued = concatenate(u.restrict(0, 24), u.restrict(24, n).rebased());
  CHECK(glued.n_nodes() == u.n_nodes());
  CHECK((glued.values() - u.values()).cwiseAbs().maxCoeff() <= 1e-14);
  auto broken = u.restrict(24, n).rebased();
  Eigen::MatrixXd bv = broken.values();
  bv(0, 0) += 1e-6;
  CHECK_THROWS(concatenate(u.restrict(0, 24), SampledPath(dt, bv)));

  // solving on [0, tau] and then from u(tau) with the shifted driver reproduces the solution
  ProblemSpec first = spec;
  first.n_steps = 32;
  first.horizon = 0.5;
  ProblemSpec second = first;
  const auto a = solve_mild(heat_u0(8), omega.restrict(0, 32), first, cfg).elements[0];
  const auto b = solve_mild(a.value(32), wiener_shift(omega, 32).forward_part(), second, cfg).elements[0];
  const auto ab = concatenate(a, b);
  CHECK((ab.values() - u.values()).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(fixed_point_residual(ab, omega, spec, 0.0).unweighted <= 3 * cfg.fp_tol);

  CHECK(translate_check(u, 0.0, omega, spec, 0.0).unweighted == doctest::Approx(fixed_point_residual(u, omega, spec, 0.0).unweighted).epsilon(1e-9));
  CHECK(translate_check(u, 0.5, omega, spec, 0.0).unweighted <= 2 * cfg.fp_tol);
}

TEST_CASE("empirical uniform bound") {
  const int n = 32;
  const double dt = 1.0 / n;
  const auto spec = heat_spec(n, 4);
  std::vector<SampledPath> drivers;
  for (int k = 0; k < 4; ++k) drivers.push_back(sample_qfbm(spec.op, spec.params.hurst, n, dt, mix_seed(70, k)));
  std::vector<SpectralField> init;
  for (const double r : {0.0, 0.5, 1.0}) init.push_back(SpectralField::Constant(4, r));
  const auto rep = empirical_uniform_bound(init, drivers, 1e6, spec, quick_config());
  CHECK(rep.solves == 12);
  CHECK(rep.failures == 0);
  CHECK(std::isfinite(rep.max_norm));
  CHECK(rep.max_norm > 0.0);
  const auto none = empirical_uniform_bound(init, drivers, 0.0, spec, quick_config());
  CHECK(none.skipped_drivers == 4);
  CHECK(none.solves == 0);
}
