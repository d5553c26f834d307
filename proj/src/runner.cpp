#include "pathwise/runner.hpp"

#include "pathwise/dynsys.hpp"
#include "pathwise/path_io.hpp"
#include "pathwise/verification.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace pathwise {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> header_lines(const RunConfig& cfg) {
  std::vector<std::string> out = {"config_hash = " + cfg.hash()};
  for (const auto& l : cfg.canonical_lines()) out.push_back(l);
  return out;
}

json base_report(const RunConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["config_hash"] = cfg.hash();
  j["config"] = cfg.canonical_lines();
  return j;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j, std::ostream& log) {
  const std::string file = out_path(cfg, name);
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << j.dump(2) << "\n";
  log << "wrote " << file << "\n";
}

void write_csv(const RunConfig& cfg, const std::string& name, const SampledPath& p, std::ostream& log) {
  const std::string file = out_path(cfg, name);
  write_path_csv(file, p, header_lines(cfg));
  log << "wrote " << file << "\n";
}

json check_json(const CheckResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.measured) m[k] = v;
  json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["pass"] = r.pass;
  j["measured"] = m;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json solution_json(const SolutionSet& set) {
  json j;
  j["rho"] = set.rho;
  j["probe_contraction"] = set.probe_contraction;
  j["iterate_contraction"] = set.iterate_contraction;
  j["c_S"] = set.c_S;
  j["ball_radius"] = set.ball_radius;
  j["n_solutions"] = set.elements.size();
  j["weighted_residuals"] = set.residuals;
  j["unweighted_residuals"] = set.unweighted_residuals;
  j["provenance"] = set.provenance;
  std::vector<bool> ball(set.in_ball.begin(), set.in_ball.end());
  j["in_ball"] = ball;
  j["converged_starts"] = set.converged_starts;
  j["failed_starts"] = set.failed_starts;
  j["residual_history"] = set.residual_history;
  return j;
}

int run_sample_path(const RunConfig& cfg, std::ostream& log) {
  const SpectralOperator op = cfg.make_operator();
  const auto w = sample_qfbm(op, cfg.params.hurst, cfg.n_steps(), cfg.dt(), cfg.seed);
  write_csv(cfg, "path.csv", w, log);
  json j = base_report(cfg);
  j["n_steps"] = cfg.n_steps();
  j["dt"] = cfg.dt();
  j["n_modes"] = op.n_modes();
  j["trace_Q"] = op.trace();
  j["degenerate"] = degenerate_noise(op);
  j["holder_seminorm_beta_prime"] = holder_seminorm(w, cfg.params.beta_prime);
  j["holder_seminorm_beta"] = holder_seminorm(w, cfg.params.beta);
  j["wiener_modulus_2^-2"] = wiener_modulus(w, cfg.params.beta, 0.25).value;
  j["wiener_modulus_2^-6"] = wiener_modulus(w, cfg.params.beta, std::ldexp(1.0, -6)).value;
  j["files"] = {"path.csv"};
  write_json(cfg, "sample_path.json", j, log);
  return kExitOk;
}

int run_integrate(const RunConfig& cfg, std::ostream& log) {
  const int n = cfg.n_steps();
  const double dt = cfg.dt();
  const auto w = sample_fbm_1d(cfg.params.hurst, n, dt, cfg.seed);
  SampledPath g;
  if (cfg.integrand == "fbm") {
    g = sample_fbm_1d(cfg.params.hurst, n, dt, mix_seed(cfg.seed, 1));
  } else if (cfg.integrand == "time") {
    Eigen::MatrixXd v(n + 1, 1);
    for (int k = 0; k <= n; ++k) v(k, 0) = k * dt;
    g = SampledPath(dt, v);
  } else {
    g = w;
  }
  const double s = cfg.integrate_s, t = cfg.integrate_t;
  const double value = pathwise_integral(g, w, cfg.params, s, t);
  double trapezoid = 0.0;
  for (auto k = w.index_of(s); k < w.index_of(t); ++k) {
    trapezoid += 0.5 * (g.values()(k, 0) + g.values()(k + 1, 0)) * (w.values()(k + 1, 0) - w.values()(k, 0));
  }
  const double bound = integral_bound_constant(cfg.params) *
                       holder_beta_norm(IntegrandPath::from_scalar(g), cfg.params.beta, s, t) *
                       holder_seminorm(w, cfg.params.beta_prime, s, t) * std::pow(t - s, cfg.params.beta_prime);
  const double ones = pathwise_integral(SampledPath(dt, Eigen::MatrixXd::Ones(n + 1, 1)), w, cfg.params, s, t);
  const double incr = w.values()(w.index_of(t), 0) - w.values()(w.index_of(s), 0);

  write_csv(cfg, "driver.csv", w, log);
  write_csv(cfg, "integrand.csv", g, log);
  json j = base_report(cfg);
  j["s"] = s;
  j["t"] = t;
  j["integrand"] = cfg.integrand;
  j["value"] = value;
  j["trapezoid_young_sum"] = trapezoid;
  if (n <= 512) {
    j["reference_value"] = pathwise_integral_reference(IntegrandPath::from_scalar(g), w, cfg.params, s, t)(0);
  }
  j["norm_bound"] = bound;
  j["norm_bound_holds"] = std::abs(value) <= bound;
  j["constant_identity_defect"] = std::abs(ones - incr);
  j["sign"] = integral_sign(cfg.params.alpha);
  j["files"] = {"driver.csv", "integrand.csv"};
  write_json(cfg, "integrate.json", j, log);
  return kExitOk;
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = cfg.make_problem();
  const auto w = sample_qfbm(spec.op, cfg.params.hurst, cfg.n_steps(), cfg.dt(), cfg.seed);
  const SpectralField u0 = cfg.initial_value();
  write_csv(cfg, "driver.csv", w, log);
  json j = base_report(cfg);
  const auto consts = check_declared_constants(spec, 100, mix_seed(cfg.seed, 5));
  j["declared_constants"] = {{"c_F", spec.c_F},
                             {"L_F", spec.L_F},
                             {"c_G", spec.c_G},
                             {"L_G", spec.L_G},
                             {"drift_violations", consts.drift_violations},
                             {"diffusion_violations", consts.diffusion_violations},
                             {"worst_drift_ratio", consts.worst_drift_ratio},
                             {"worst_diffusion_ratio", consts.worst_diffusion_ratio}};
  try {
    const auto set = solve_mild(u0, w, spec, cfg.solver);
    j["converged"] = true;
    j["solution"] = solution_json(set);
    std::vector<std::string> files = {"driver.csv"};
    double smooth = 0.0;
    for (std::size_t k = 0; k < set.elements.size(); ++k) {
      const std::string name = "solution_" + std::to_string(k) + ".csv";
      write_csv(cfg, name, set.elements[k], log);
      files.push_back(name);
      smooth = std::max(smooth, smoothing_profile(set.elements[k], spec, 0.4).measured_constant);
    }
    j["smoothing_constant_delta_0.4"] = smooth;
    j["files"] = files;
    write_json(cfg, "solve.json", j, log);
    return kExitOk;
  } catch (const SolverError& e) {
    j["converged"] = false;
    j["error"] = e.what();
    j["residual_trace"] = e.residual_trace();
    write_json(cfg, "solve.json", j, log);
    log << e.what() << "\n";
    return kExitNoConvergence;
  }
}

int run_cocycle(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = cfg.make_problem();
  const auto w = sample_qfbm(spec.op, cfg.params.hurst, cfg.n_steps(), cfg.dt(), cfg.seed);
  const SpectralField u0 = cfg.initial_value();
  json j = base_report(cfg);
  json pairs = json::array();
  try {
    for (const auto& [t, s] : cfg.cocycle_pairs) {
      const auto r = check_cocycle(t, s, w, u0, spec, cfg.solver);
      pairs.push_back({{"t", t}, {"s", s}, {"d1", r.d1}, {"d2", r.d2}, {"lhs_size", r.lhs_size}, {"rhs_size", r.rhs_size}});
      log << "cocycle t=" << t << " s=" << s << " d1=" << r.d1 << " d2=" << r.d2 << "\n";
    }
  } catch (const SolverError& e) {
    j["error"] = e.what();
    j["pairs"] = pairs;
    write_json(cfg, "cocycle.json", j, log);
    return kExitNoConvergence;
  }
  j["pairs"] = pairs;
  write_json(cfg, "cocycle.json", j, log);
  return kExitOk;
}

int run_usc(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = cfg.make_problem();
  const auto w = sample_qfbm(spec.op, cfg.params.hurst, cfg.n_steps(), cfg.dt(), cfg.seed);
  UscOptions opt;
  opt.samples_per_radius = cfg.usc_samples;
  opt.perturb_driver = cfg.usc_perturb_driver;
  opt.tolerance = 10.0 * 2.0 * cfg.solver.fp_tol;
  opt.seed = mix_seed(cfg.seed, 99);
  json j = base_report(cfg);
  try {
    const auto rep = usc_probe(cfg.usc_t, w, cfg.initial_value(), spec, cfg.solver, cfg.usc_radii, opt);
    j["t"] = cfg.usc_t;
    j["radii"] = rep.radii;
    j["errors"] = rep.errors;
    j["failures"] = rep.failures;
    j["monotone"] = rep.monotone;
    j["tolerance"] = rep.tolerance;
    j["smallest_within_tolerance"] = rep.smallest_within_tolerance;
    const std::string file = out_path(cfg, "usc.csv");
    std::ofstream os(file);
    for (const auto& l : header_lines(cfg)) os << "# " << l << "\n";
    os << "radius,e\n";
    for (std::size_t k = 0; k < rep.radii.size(); ++k) {
      os << format_number(rep.radii[k]) << "," << format_number(rep.errors[k]) << "\n";
    }
    log << "wrote " << file << "\n";
    j["files"] = {"usc.csv"};
  } catch (const SolverError& e) {
    j["error"] = e.what();
    write_json(cfg, "usc.json", j, log);
    return kExitNoConvergence;
  }
  write_json(cfg, "usc.json", j, log);
  return kExitOk;
}

}  // namespace

std::string verify_all_report(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = cfg.make_problem();
  const SpectralField u0 = cfg.initial_value();
  const std::uint64_t seed = cfg.seed;
  std::vector<CheckResult> results;
  auto step = [&](CheckResult r) {
    log << (r.pass ? "pass " : "FAIL ") << r.id << "\n";
    results.push_back(std::move(r));
  };
  step(check_semigroup(spec.op, cfg.params.beta));
  step(check_fbm_exactness({0.6, 0.75, 0.9}, 256));
  step(check_constant_integrand(cfg.params, 20, 1024, mix_seed(seed, 1)));
  step(check_young_agreement(cfg.params, {8, 10, 12}));
  step(check_additivity_shift(cfg.params, 10, 5, 256, mix_seed(seed, 2)));
  step(check_kummer(cfg.params, cfg.horizon));
  step(check_fixed_point(spec, u0, cfg.solver, mix_seed(seed, 3)));
  step(check_additive_oracle(cfg.params, 1024, mix_seed(seed, 4)));
  step(check_cocycle_suite(
      [spec](int n) {
        ProblemSpec s = spec;
        s.n_steps = n;
        return s;
      },
      u0, cfg.solver, cfg.cocycle_pairs, cfg.n_steps(), mix_seed(seed, 5)));
  step(check_usc(spec, u0, cfg.solver, cfg.usc_t, cfg.usc_radii, cfg.usc_samples, mix_seed(seed, 6),
                 cfg.usc_perturb_driver));
  step(check_holder_statistics(0.8, 0.6, 100, 256, mix_seed(seed, 7), 95));
  step(check_hs_lipschitz(cfg.make_kernel(), spec.n_modes(), 100, mix_seed(seed, 8)));

  json j = base_report(cfg);
  json suites = json::array();
  bool all = true;
  for (const auto& r : results) {
    suites.push_back(check_json(r));
    all = all && r.pass;
  }
  j["suites"] = suites;
  j["all_pass"] = all;
  return j.dump(2) + "\n";
}

int run(const RunConfig& cfg, std::ostream& log) {
  std::filesystem::create_directories(cfg.out_dir);
  if (cfg.experiment == "sample-path") return run_sample_path(cfg, log);
  if (cfg.experiment == "integrate") return run_integrate(cfg, log);
  if (cfg.experiment == "solve") return run_solve(cfg, log);
  if (cfg.experiment == "cocycle") return run_cocycle(cfg, log);
  if (cfg.experiment == "usc") return run_usc(cfg, log);
  const std::string text = verify_all_report(cfg, log);
  const std::string file = out_path(cfg, "verify_all.json");
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << text;
  log << "wrote " << file << "\n";
  return kExitOk;
}

}  // namespace pathwise
