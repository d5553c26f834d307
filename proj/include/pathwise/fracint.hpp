#pragma once

#include "pathwise/paths.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace pathwise {

/// Truncated matrix of a Hilbert-Schmidt operator g on V: entry (j, i) = (e_j, g e_i).
using HSMatrix = Eigen::MatrixXd;

/// HSMatrix-valued function on a uniform lattice (same conventions as SampledPath).
class IntegrandPath {
 public:
  IntegrandPath(double dt, std::vector<HSMatrix> values, std::int64_t start_step = 0);
  /// 1x1 integrand carrying the values of a scalar path.
  static IntegrandPath from_scalar(const SampledPath& g);

  double dt() const { return dt_; }
  std::int64_t start_step() const { return start_step_; }
  double time(Eigen::Index j) const { return static_cast<double>(start_step_ + j) * dt_; }
  Eigen::Index n_nodes() const { return static_cast<Eigen::Index>(values_.size()); }
  Eigen::Index rows() const { return values_.front().rows(); }
  Eigen::Index cols() const { return values_.front().cols(); }
  const HSMatrix& value(Eigen::Index j) const { return values_[static_cast<std::size_t>(j)]; }
  Eigen::Index index_of(double t) const;
  /// Node values of entry (j, i) over time.
  std::vector<double> entry_series(Eigen::Index j, Eigen::Index i) const;

 private:
  double dt_;
  std::int64_t start_step_;
  std::vector<HSMatrix> values_;
};

/// ||g||_{beta,beta,s,t} with the Hilbert-Schmidt norm on values.
double holder_beta_norm(const IntegrandPath& g, double beta, double s, double t);

/// Position r = t_cell + x dt inside a grid cell; x_complement = 1 - x kept exactly.
struct CellPoint {
  Eigen::Index cell = 0;
  double x = 0.0;
  double x_complement = 1.0;
};

// Both derivatives act on the piecewise-linear interpolant of node values; the singular
// integrals are evaluated piece by piece with the exact moments of the kernels, so the
// result is exact for that interpolant up to rounding. Indices are node indices of `nodes`.

/// (1/Gamma(1-a)) (g(r)/(r-s)^a + a int_s^r (g(r)-g(q))/(r-q)^{1+a} dq), s = node s_index.
double left_derivative(std::span<const double> nodes, double dt, double alpha,
                       Eigen::Index s_index, const CellPoint& r);

/// (1/Gamma(a)) ((w(r)-w(t))/(t-r)^{1-a} + (1-a) int_r^t (w(r)-w(q))/(q-r)^{2-a} dq),
/// t = node t_index. The (-1)^{1-a} factor is not included (see `integral_sign`).
double right_derivative(std::span<const double> nodes, double dt, double alpha,
                        Eigen::Index t_index, const CellPoint& r);

/// D^alpha_{s+} g[r], componentwise. Requires s < r inside the window.
SpectralField frac_deriv_left(const SampledPath& g, double alpha, double s, double r);
HSMatrix frac_deriv_left(const IntegrandPath& g, double alpha, double s, double r);

/// D^{1-alpha}_{t-} omega_{t-}[r], componentwise. Requires r < t inside the window.
SpectralField frac_deriv_right(const SampledPath& omega, double alpha, double r, double t);

/// Universal weights of the discretized fractional integral.
///
/// For piecewise-linear g and omega on cells 0..m-1 of [s, t],
///
///   int_s^t g d omega = g_0 sum_l dw_l W0(l) + sum_p dg_p sum_{l>=p} dw_l W(l-p),
///
/// where W0 and W come from integrating D^alpha of the piecewise-linear basis against
/// D^{1-alpha} of the increments over every cell with a tanh-sinh rule. They depend on
/// alpha only (not on dt), which is what makes them cacheable.
class FractionalKernel {
 public:
  FractionalKernel(double alpha, Eigen::Index cells);

  double alpha() const { return alpha_; }
  Eigen::Index cells() const { return static_cast<Eigen::Index>(start_.size()); }
  double start_weight(Eigen::Index e) const { return start_[static_cast<std::size_t>(e)]; }
  double increment_weight(Eigen::Index e) const { return incr_[static_cast<std::size_t>(e)]; }
  std::span<const double> start_weights() const { return start_; }
  std::span<const double> increment_weights() const { return incr_; }

  /// Real sign multiplying the product of the two derivatives, fixed by requiring
  /// int_s^t 1 d omega = omega(t) - omega(s).
  double sign() const { return sign_; }

 private:
  double alpha_;
  double sign_ = 1.0;
  std::vector<double> start_;
  std::vector<double> incr_;
};

/// Shared immutable kernel with at least `cells` entries (thread-safe cache keyed by alpha).
std::shared_ptr<const FractionalKernel> fractional_kernel(double alpha, Eigen::Index cells);

/// Sign convention for (-1)^alpha (-1)^{1-alpha}; calibrated once per alpha.
double integral_sign(double alpha);

/// int_s^t g d omega = sum_j (sum_i int D^alpha g_{ji} D^{1-alpha} omega_i dr) e_j.
/// Validates the exponent chain and that [s, t] lies on both grids.
SpectralField pathwise_integral(const IntegrandPath& g, const SampledPath& omega,
                                const HolderParams& params, double s, double t);
/// Scalar integrand against a one-mode driver.
double pathwise_integral(const SampledPath& g, const SampledPath& omega,
                         const HolderParams& params, double s, double t);

/// Same integral evaluated by computing both fractional derivatives at the tanh-sinh nodes
/// of every cell and summing the products. O(m^2 Q) per entry; used as a reference.
SpectralField pathwise_integral_reference(const IntegrandPath& g, const SampledPath& omega,
                                          const HolderParams& params, double s, double t);

/// Running weights for int_{t_0}^{t_b} h d omega_i, advanced one node at a time.
/// After `advance()` has been called b times, the integral of a piecewise-linear h with
/// node values h_0..h_b is h_0 start_weight(i) + sum_{p<b} (h_{p+1}-h_p) increment_weights(i)[p].
class CumulativeIntegrator {
 public:
  CumulativeIntegrator(const SampledPath& omega, double alpha);

  Eigen::Index position() const { return position_; }
  void advance();
  double start_weight(int mode) const { return start_(mode); }
  std::span<const double> increment_weights(int mode) const {
    return {incr_.col(mode).data(), static_cast<std::size_t>(position_)};
  }

 private:
  std::shared_ptr<const FractionalKernel> kernel_;
  Eigen::MatrixXd increments_;  // (n_steps x N) driver increments
  Eigen::Index position_ = 0;
  Eigen::VectorXd start_;
  Eigen::MatrixXd incr_;  // (n_steps x N)
};

/// Gamma-prefactor constant c with |D^{1-alpha}_{t-} omega[r]| <= c |||omega|||_{beta'} (t-r)^{alpha+beta'-1}.
double right_derivative_bound_constant(const HolderParams& params);
/// Constant c with |int_s^t g d omega| <= c ||g||_{beta,beta,s,t} |||omega|||_{beta',s,t} (t-s)^{beta'}.
double integral_bound_constant(const HolderParams& params);

}  // namespace pathwise
