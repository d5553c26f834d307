#pragma once

#include "pathwise/mild_solver.hpp"

#include <cstdint>
#include <vector>

namespace pathwise {

using FieldSet = std::vector<SpectralField>;

/// Phi(t, omega, u0) = {u(t) : u a fixed point found by solve_mild on omega's window}.
/// t = 0 gives {u0} without solving.
FieldSet phi(double t, const SampledPath& omega, const SpectralField& u0, const ProblemSpec& spec,
             const SolverConfig& cfg);

/// sup_{a in A} inf_{b in B} ||a - b||. Not symmetric.
double hausdorff_semidist(const FieldSet& A, const FieldSet& B);

struct CocycleReport {
  double t = 0.0;
  double s = 0.0;
  double d1 = 0.0;  ///< semidist(Phi(t+s, omega, u0), Phi(t, theta_s omega, Phi(s, omega, u0)))
  double d2 = 0.0;  ///< the reverse direction
  std::size_t lhs_size = 0;
  std::size_t rhs_size = 0;
};

/// Compares Phi(t+s, omega, u0) with the union over v in Phi(s, omega, u0) of
/// Phi(t, theta_s omega, v), the latter solved on [0, t] with the shifted driver.
CocycleReport check_cocycle(double t, double s, const SampledPath& omega, const SpectralField& u0,
                            const ProblemSpec& spec, const SolverConfig& cfg);

struct UscReport {
  std::vector<double> radii;
  std::vector<double> errors;  ///< e(r) = max over samples of semidist(Phi(u0^n), Phi(u0))
  std::vector<int> failures;   ///< solver failures per radius (skipped samples)
  bool monotone = false;       ///< e nonincreasing as r decreases (up to `noise` relative slack)
  double tolerance = 0.0;      ///< threshold for the smallest radius
  bool smallest_within_tolerance = false;
};

struct UscOptions {
  int samples_per_radius = 10;
  bool perturb_driver = false;  ///< also move omega by r times a unit-seminorm fBm path
  double noise = 0.0;
  double tolerance = 2e-7;
  std::uint64_t seed = 1;
};

/// Upper-semicontinuity probe of u0 -> Phi(t, omega, u0) (and optionally of omega).
UscReport usc_probe(double t, const SampledPath& omega, const SpectralField& u0, const ProblemSpec& spec,
                    const SolverConfig& cfg, const std::vector<double>& radii, const UscOptions& options);

}  // namespace pathwise
