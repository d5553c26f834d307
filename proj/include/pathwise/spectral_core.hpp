#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pathwise {

/// Coefficients of an element of V in the eigenbasis (e_i) of -A.
using SpectralField = Eigen::VectorXd;

/// Diagonal representation of -A truncated to N modes, together with the
/// eigenvalues q_i of the noise covariance Q in the same basis.
class SpectralOperator {
 public:
  SpectralOperator(Eigen::VectorXd eigenvalues, Eigen::VectorXd trace_weights);

  /// -d^2/dx^2 on (0, length) with Dirichlet conditions: lambda_i = (i pi / length)^2.
  /// Trace weights q_i = i^{-trace_decay}.
  static SpectralOperator laplacian_1d(int n_modes, double length = 3.14159265358979323846,
                                       double trace_decay = 2.0);

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::VectorXd& trace_weights() const { return trace_weights_; }
  int n_modes() const { return static_cast<int>(eigenvalues_.size()); }
  double lambda_min() const { return eigenvalues_(0); }
  double trace() const { return trace_weights_.sum(); }

  /// Same operator restricted to the first n modes.
  SpectralOperator truncated(int n) const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd trace_weights_;
};

/// S(t)u, i.e. c_i -> exp(-lambda_i t) c_i. Throws on t < 0.
SpectralField semigroup_apply(const SpectralOperator& op, double t, const SpectralField& u);

/// ||(-A)^delta u|| = sqrt(sum lambda_i^{2 delta} c_i^2).
double frac_power_norm(const SpectralOperator& op, double delta, const SpectralField& u);

struct Eq2Check {
  double theta = 0.0;
  double sigma = 0.0;
  /// sup over the grid of sup_i lambda_i^{theta-sigma} (1 - e^{-lambda_i t}) / t^{sigma-theta}.
  double measured_constant = 0.0;
  bool within_unit_bound = false;
};

struct SemigroupBoundReport {
  double gamma = 0.0;
  /// sup_t t^gamma e^{lambda_1 t} sup_i lambda_i^gamma e^{-lambda_i t}: the constant c_S in
  /// ||(-A)^gamma S(t)|| <= c_S e^{-lambda_1 t} t^{-gamma}.
  double measured_cs = 0.0;
  /// sup_i lambda_i^gamma e^{-lambda_i t} at each grid time.
  std::vector<double> smoothing_norms;
  /// (gamma / (e t))^gamma at each grid time.
  std::vector<double> envelope;
  /// largest smoothing_norms[k] / envelope[k]; <= 1 up to rounding.
  double max_envelope_ratio = 0.0;
  bool envelope_holds = false;
  std::vector<Eq2Check> eq2;
};

/// Measures the constants of the analytic-semigroup estimates on a time grid.
/// `beta` selects the intermediate exponent of the representative (theta, sigma)
/// pairs {(0,1), (0,beta), (beta,1)}.
SemigroupBoundReport verify_semigroup_bounds(const SpectralOperator& op, double gamma,
                                             std::span<const double> t_grid, double beta = 0.5);

}  // namespace pathwise
