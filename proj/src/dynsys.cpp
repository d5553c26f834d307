#include "pathwise/dynsys.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pathwise {

namespace {

// solves on [0, t] and returns the values at t
FieldSet solve_values(double t, const SampledPath& omega, const SpectralField& u0, const ProblemSpec& spec,
                      const SolverConfig& cfg) {
  const auto k = omega.index_of(t);
  const auto set = solve_mild(u0, omega.restrict(0, k), spec, cfg);
  return set.values_at(k);
}

}  // namespace

FieldSet phi(double t, const SampledPath& omega, const SpectralField& u0, const ProblemSpec& spec,
             const SolverConfig& cfg) {
  const auto k = omega.index_of(t);
  if (k == 0) return {u0};
  return solve_mild(u0, omega, spec, cfg).values_at(k);
}

double hausdorff_semidist(const FieldSet& A, const FieldSet& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff_semidist: empty set");
  double sup = 0.0;
  for (const auto& a : A) {
    double inf = std::numeric_limits<double>::infinity();
    for (const auto& b : B) {
      if (a.size() != b.size()) throw std::invalid_argument("hausdorff_semidist: dimension mismatch");
      inf = std::min(inf, (a - b).norm());
    }
    sup = std::max(sup, inf);
  }
  return sup;
}

CocycleReport check_cocycle(double t, double s, const SampledPath& omega, const SpectralField& u0,
                            const ProblemSpec& spec, const SolverConfig& cfg) {
  if (omega.start_step() != 0) throw std::invalid_argument("check_cocycle: driver must start at t = 0");
  if (!(t > 0.0) || !(s > 0.0)) throw std::invalid_argument("check_cocycle: need t, s > 0");
  const auto ks = omega.index_of(s);
  const auto kt = static_cast<Eigen::Index>(std::llround(t / omega.dt()));
  omega.index_of(t + s);  // horizon check

  CocycleReport out;
  out.t = t;
  out.s = s;
  const FieldSet lhs = solve_values(t + s, omega, u0, spec, cfg);
  const FieldSet mid = solve_values(s, omega, u0, spec, cfg);
  const SampledPath shifted = wiener_shift(omega, ks).forward_part().restrict(0, kt);
  FieldSet rhs;
  for (const auto& v : mid) {
    const auto set = solve_mild(v, shifted, spec, cfg);
    for (auto& x : set.values_at(kt)) rhs.push_back(std::move(x));
  }
  out.lhs_size = lhs.size();
  out.rhs_size = rhs.size();
  out.d1 = hausdorff_semidist(lhs, rhs);
  out.d2 = hausdorff_semidist(rhs, lhs);
  return out;
}

UscReport usc_probe(double t, const SampledPath& omega, const SpectralField& u0, const ProblemSpec& spec,
                    const SolverConfig& cfg, const std::vector<double>& radii, const UscOptions& options) {
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 0.0) || (k > 0 && radii[k] >= radii[k - 1]))
      throw std::invalid_argument("usc_probe: radii must be nonnegative and decreasing");
  }
  UscReport out;
  out.radii = radii;
  out.tolerance = options.tolerance;
  const FieldSet base = phi(t, omega, u0, spec, cfg);
  const int N = static_cast<int>(u0.size());
  const SpectralOperator unit(spec.op.eigenvalues(), Eigen::VectorXd::Ones(N));

  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double e = 0.0;
    int failures = 0;
    for (int m = 0; m < options.samples_per_radius; ++m) {
      const std::uint64_t sub = mix_seed(options.seed, k * 1000003u + static_cast<std::uint64_t>(m));
      std::mt19937_64 rng(sub);
      std::normal_distribution<double> normal;
      SpectralField dir(N);
      for (int i = 0; i < N; ++i) dir(i) = normal(rng);
      const SpectralField u0n = u0 + r * dir / dir.norm();
      SampledPath driver = omega;
      if (options.perturb_driver && r > 0.0) {
        const auto p = sample_qfbm(unit, spec.params.hurst, static_cast<int>(omega.n_steps()), omega.dt(),
                                   mix_seed(sub, 7));
        const double size = holder_seminorm(p, spec.params.beta_prime);
        driver = SampledPath(omega.dt(), omega.values() + (r / size) * p.values(), omega.start_step());
      }
      try {
        e = std::max(e, hausdorff_semidist(phi(t, driver, u0n, spec, cfg), base));
      } catch (const SolverError&) {
        ++failures;
      }
    }
    out.errors.push_back(e);
    out.failures.push_back(failures);
  }
  out.monotone = true;
  for (std::size_t k = 1; k < out.errors.size(); ++k) {
    if (out.errors[k] > out.errors[k - 1] * (1.0 + options.noise)) out.monotone = false;
  }
  out.smallest_within_tolerance = !out.errors.empty() && out.errors.back() <= options.tolerance;
  return out;
}

}  // namespace pathwise
