#pragma once

#include "pathwise/fracint.hpp"
#include "pathwise/paths.hpp"
#include "pathwise/spectral_core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace pathwise {

using DriftMap = std::function<SpectralField(const SpectralField&)>;
using DiffusionMap = std::function<HSMatrix(const SpectralField&)>;

/// du = (Au + F(u)) dt + G(u) d omega on [0, horizon], truncated to op.n_modes() modes.
struct ProblemSpec {
  SpectralOperator op = SpectralOperator::laplacian_1d(16);
  DriftMap drift;          ///< F; empty means F = 0
  DiffusionMap diffusion;  ///< G; empty means G = 0
  double c_F = 0.0;        ///< ||F(u)|| <= c_F + L_F ||u||
  double L_F = 0.0;
  double c_G = 0.0;  ///< ||G(0)||_{L2}
  double L_G = 0.0;  ///< Lipschitz constant of G into L2(V)
  HolderParams params;
  double horizon = 1.0;
  int n_steps = 256;

  double dt() const { return horizon / n_steps; }
  int n_modes() const { return op.n_modes(); }
  /// Throws std::invalid_argument on an invalid parameter chain or grid.
  void validate() const;

  SpectralField eval_drift(const SpectralField& u) const;
  HSMatrix eval_diffusion(const SpectralField& u) const;
};

/// Random-field spot checks of the declared growth and Lipschitz constants.
struct ConstantCheck {
  int samples = 0;
  int drift_violations = 0;
  int diffusion_violations = 0;
  double worst_drift_ratio = 0.0;      ///< max ||F(u)|| / (c_F + L_F ||u||)
  double worst_diffusion_ratio = 0.0;  ///< max ||G(u)-G(v)|| / (L_G ||u-v||)
};
ConstantCheck check_declared_constants(const ProblemSpec& spec, int samples, std::uint64_t seed,
                                       double slack = 1e-6);

struct SolverConfig {
  double rho = 0.0;  ///< fixed weight; 0 selects it adaptively
  double rho_start = 1.0;
  double rho_cap = 65536.0;
  double contraction_target = 0.5;
  double fp_tol = 1e-8;
  int max_iters = 200;
  int n_starts = 8;
  double distinct_tol = 1e-4;
  double perturbation_scale = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// sup_{t in [0,T]} t^d int_0^1 e^{-rho t (1-v)} v^a (1-v)^b dv.
double kummer_K(double rho, double a, double b, double d, double T);

/// Mild-solution operator for a fixed problem and driver. Precomputes the semigroup factors
/// and the driver's fractional-integral weights once, so repeated applications cost
/// O(n^2 N^2) each.
class MildOperator {
 public:
  /// omega must start at t = 0 with the spec's dt and spec.n_modes() modes.
  MildOperator(const ProblemSpec& spec, const SampledPath& omega);

  const ProblemSpec& spec() const { return spec_; }
  const SampledPath& driver() const { return omega_; }
  Eigen::Index n_steps() const { return omega_.n_steps(); }

  /// T(u)(t_b) = S(t_b)u0 + int_0^{t_b} S(t_b-r)F(u(r))dr + int_0^{t_b} S(t_b-r)G(u(r))d omega.
  SampledPath apply(const SampledPath& u, const SpectralField& u0) const;
  /// Only the noise part, for the node values G_p of the integrand.
  Eigen::MatrixXd noise_term(const std::vector<HSMatrix>& g_nodes) const;
  /// Only the drift part, for node values F_p (rows).
  Eigen::MatrixXd drift_term(const Eigen::MatrixXd& f_nodes) const;

 private:
  ProblemSpec spec_;
  SampledPath omega_;
  Eigen::MatrixXd decay_;     // (n+1) x N: e^{-lambda_j d dt}
  Eigen::VectorXd phi_old_;   // dt * phi2(lambda_j dt)
  Eigen::VectorXd phi_new_;   // dt * (phi1 - phi2)
  // weights after b advances: start_[b] (N), incr_[b] (N x b)
  std::vector<Eigen::VectorXd> start_;
  std::vector<Eigen::MatrixXd> incr_;
};

/// One application of T (builds a MildOperator).
SampledPath apply_T(const SampledPath& u, const SampledPath& omega, const SpectralField& u0,
                    const ProblemSpec& spec);

/// Paths a - b on a shared grid.
SampledPath path_difference(const SampledPath& a, const SampledPath& b);

/// sup-part plus weighted Hoelder part of S(.) acting on unit vectors: ||S(.)u0||_{beta,beta} <= c ||u0||.
double semigroup_holder_constant(const SpectralOperator& op, double beta, double dt, Eigen::Index n_steps);

struct SolutionSet {
  std::vector<SampledPath> elements;
  std::vector<double> residuals;             ///< ||T(u)-u||_{beta,beta;rho}
  std::vector<double> unweighted_residuals;  ///< ||T(u)-u||_{beta,beta}
  std::vector<int> provenance;               ///< start index that produced each element
  std::vector<bool> in_ball;
  double rho = 0.0;
  double probe_contraction = 0.0;     ///< max over probe pairs of the Lipschitz quotient of T
  double iterate_contraction = 0.0;   ///< max ratio of consecutive residuals (after the first step)
  double c_S = 0.0;
  double ball_radius = 0.0;
  std::vector<std::vector<double>> residual_history;  ///< per start, weighted residuals
  std::vector<int> converged_starts;
  int failed_starts = 0;

  std::vector<SpectralField> values_at(Eigen::Index node) const;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<std::vector<double>> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<std::vector<double>>& residual_trace() const { return trace_; }

 private:
  std::vector<std::vector<double>> trace_;
};

/// Picard iteration from cfg.n_starts initial paths in the rho-weighted norm. A start is
/// accepted once both the weighted and the unweighted residual are below cfg.fp_tol.
/// Throws SolverError when no start converges or no contractive rho below the cap exists.
SolutionSet solve_mild(const SpectralField& u0, const SampledPath& omega, const ProblemSpec& spec,
                       const SolverConfig& cfg);

/// ||u(t)||_{V_delta}. Requires 0 <= delta < beta'.
double smoothing_norm(const SampledPath& u, const ProblemSpec& spec, double t, double delta);

struct SmoothingProfile {
  std::vector<double> times;
  std::vector<double> norms;
  double measured_constant = 0.0;  ///< sup t^delta ||u(t)||_{V_delta} over t > 0
};
SmoothingProfile smoothing_profile(const SampledPath& u, const ProblemSpec& spec, double delta);

/// Pastes u2 (on [0, T2]) after u1 (on [T0, T1]). Requires u2(0) = u1(T1) within 1e-12.
SampledPath concatenate(const SampledPath& u1, const SampledPath& u2);

struct ResidualReport {
  double weighted = 0.0;
  double unweighted = 0.0;
};
/// Residual of a candidate path u (window starting at 0) under T with driver omega, u0 = u(0).
ResidualReport fixed_point_residual(const SampledPath& u, const SampledPath& omega,
                                    const ProblemSpec& spec, double rho);

/// v = u(. + s) against the shifted driver theta_s omega on [0, T - s].
ResidualReport translate_check(const SampledPath& u, double s, const SampledPath& omega,
                               const ProblemSpec& spec, double rho);

struct UniformBoundReport {
  int solves = 0;
  int skipped_drivers = 0;  ///< drivers with |||omega|||_{beta'} > R_hat
  int failures = 0;
  double max_norm = 0.0;  ///< empirical C(R, R_hat, T)
};
/// max ||u||_{beta,beta} over all solutions for every u0 in `initial` and every driver with
/// |||omega|||_{beta'} <= r_hat.
UniformBoundReport empirical_uniform_bound(const std::vector<SpectralField>& initial,
                                           const std::vector<SampledPath>& drivers, double r_hat,
                                           const ProblemSpec& spec, const SolverConfig& cfg);

}  // namespace pathwise
