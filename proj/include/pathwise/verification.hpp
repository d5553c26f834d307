#pragma once

#include "pathwise/dynsys.hpp"
#include "pathwise/example_heat.hpp"
#include "pathwise/mild_solver.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pathwise {

/// Outcome of one property suite: verdict plus the measured numbers behind it.
struct CheckResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::vector<std::pair<std::string, double>> measured;
  std::string note;

  void add(const std::string& name, double value) { measured.emplace_back(name, value); }
  double get(const std::string& name) const;
};

/// Semigroup envelope and the representative (theta, sigma) smoothing checks.
CheckResult check_semigroup(const SpectralOperator& op, double beta);

/// Built covariance and its Cholesky factor against the closed-form fBm covariance.
CheckResult check_fbm_exactness(const std::vector<double>& hursts, int n_steps, double tol = 1e-10);

/// |int c d omega - c (omega(t) - omega(s))| <= tol |c| |||omega|||_{beta'} over fBm samples.
CheckResult check_constant_integrand(const HolderParams& params, int samples, int n_steps, std::uint64_t seed,
                                     double tol = 1e-6);

/// g(r) = r against omega(r) = r^2 on [0, 1] at n = 2^k for each k in `pows`.
CheckResult check_young_agreement(const HolderParams& params, const std::vector<int>& pows, double tol = 1e-3);

/// Additivity over random (s, tau, t) and invariance under Wiener shifts, two-sided fBm driver.
CheckResult check_additivity_shift(const HolderParams& params, int triples, int shifts, int n_side,
                                   std::uint64_t seed, double tol = 1e-6);

/// K(rho) for (a, b, d) = (-alpha, alpha - 1, beta' - beta).
CheckResult check_kummer(const HolderParams& params, double T);

/// solve_mild on `spec` with a Q-fBm driver drawn from `seed`.
CheckResult check_fixed_point(const ProblemSpec& spec, const SpectralField& u0, const SolverConfig& cfg,
                              std::uint64_t seed);

/// Scalar additive-noise problem against a Riemann-Stieltjes oracle on a 4x refined grid.
CheckResult check_additive_oracle(const HolderParams& params, int n_steps, std::uint64_t seed,
                                  double tol_smooth = 1e-4, double tol_fbm = 5e-3);

/// Cocycle defects at n and 2n steps (driver sampled at 2n, subsampled for n).
CheckResult check_cocycle_suite(const std::function<ProblemSpec(int)>& make_spec, const SpectralField& u0,
                                const SolverConfig& cfg, const std::vector<std::pair<double, double>>& pairs,
                                int n_steps, std::uint64_t seed, double tol = 5e-3);

/// USC probe with the floor 2 fp_tol; e(r_min) must stay within 10 floors.
CheckResult check_usc(const ProblemSpec& spec, const SpectralField& u0, const SolverConfig& cfg, double t,
                      const std::vector<double>& radii, int samples, std::uint64_t seed, bool perturb_driver = false);

/// Hoelder seminorm finiteness and Wiener modulus decrease over fBm seeds.
CheckResult check_holder_statistics(double hurst, double beta, int seeds, int n_steps, std::uint64_t seed,
                                    int required);

/// ||G(u1) - G(u2)|| <= ||L|| ||u1 - u2|| on random pairs.
CheckResult check_hs_lipschitz(const KernelSpec& kernel, int n_modes, int pairs, std::uint64_t seed);

}  // namespace pathwise
