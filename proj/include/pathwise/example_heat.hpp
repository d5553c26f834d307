#pragma once

#include "pathwise/fracint.hpp"
#include "pathwise/mild_solver.hpp"

#include <functional>
#include <memory>
#include <string>

namespace pathwise {

/// Sine quadrature on (0, pi): nodes x_m = m pi / (M+1), m = 1..M, weight pi / (M+1),
/// basis e_i(x) = sqrt(2/pi) sin(i x). Synthesis followed by projection is the identity
/// for every mode i <= M (discrete sine transform orthogonality).
class SineGrid {
 public:
  SineGrid(int n_points, int n_modes);

  int n_points() const { return static_cast<int>(nodes_.size()); }
  int n_modes() const { return static_cast<int>(basis_.cols()); }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  double weight() const { return weight_; }
  /// (M x N) matrix of e_i(x_m).
  const Eigen::MatrixXd& basis() const { return basis_; }

  Eigen::VectorXd to_physical(const SpectralField& u) const { return basis_ * u; }
  SpectralField project(const Eigen::VectorXd& values) const { return weight_ * (basis_.transpose() * values); }
  /// Quadrature value of the V-norm of a function sampled at the nodes.
  double norm(const Eigen::VectorXd& values) const { return std::sqrt(weight_ * values.squaredNorm()); }

 private:
  Eigen::VectorXd nodes_;
  double weight_;
  Eigen::MatrixXd basis_;
};

/// Scalar nonlinearity with declared bounds |f(z)| <= growth + lipschitz |z|.
struct ScalarMap {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 0.0;
  double growth = 0.0;
};

/// `zero`, `identity`, `tanh`, `sin`, `clip` (to [-1, 1]); the value is multiplied by `scale`.
ScalarMap named_scalar_map(const std::string& name, double scale = 1.0);

/// F(u)[x] = f(u(x)), evaluated on the grid and projected back. When `violations` is given,
/// it receives the number of nodes where the declared growth bound fails.
SpectralField nemytskii_F(const SineGrid& grid, const ScalarMap& f, const SpectralField& u,
                          int* violations = nullptr);
/// Same on the default grid of 256 nodes.
SpectralField nemytskii_F(const ScalarMap& f, const SpectralField& u);

/// g(x, y, z) with its Lipschitz profile L(x) in z. Either a general three-argument kernel or
/// the product k(x, y) psi(z); the product form is evaluated with a precomputed spatial table.
struct KernelSpec {
  std::string name;
  std::function<double(double, double, double)> g;
  std::function<double(double, double)> spatial;
  std::function<double(double)> profile;
  std::function<double(double)> lipschitz_profile;
  int n_points = 256;

  bool is_product() const { return static_cast<bool>(spatial) && static_cast<bool>(profile); }
  double value(double x, double y, double z) const { return is_product() ? spatial(x, y) * profile(z) : g(x, y, z); }
  void validate() const;

  static KernelSpec product(std::string name, std::function<double(double, double)> k, std::function<double(double)> psi,
                            std::function<double(double)> lipschitz, int n_points = 256);
  static KernelSpec general(std::string name, std::function<double(double, double, double)> g,
                            std::function<double(double)> lipschitz, int n_points = 256);
};

/// 0.1 sin(x) sin(y) tanh(z) with L(x) = 0.1 sin(x) (demo choice).
KernelSpec default_heat_kernel(int n_points = 256);
KernelSpec zero_kernel(int n_points = 256);
/// Product kernel k(x_m, y_l) psi(z) with k read from a CSV of M rows by M columns (values at
/// the sine nodes; '#' lines skipped). L(x_m) = Lip(psi) max_l |k(x_m, y_l)|.
KernelSpec tabulated_kernel(const std::string& csv_file, const ScalarMap& psi);

/// G(u) as an N x N matrix: entries w^2 sum_{m,l} e_j(x_m) g(x_m, y_l, u(y_l)) e_i(y_l).
class KernelOperator {
 public:
  KernelOperator(KernelSpec spec, int n_modes);

  const KernelSpec& spec() const { return spec_; }
  const SineGrid& grid() const { return grid_; }
  HSMatrix operator()(const SpectralField& u) const;
  /// Quadrature value of ||L||_V.
  double lipschitz_norm() const;
  /// Quadrature value of int_D ||g(x, ., u(.))||_V^2 dx; bounds ||G(u)||_{L2}^2.
  double parseval_bound(const SpectralField& u) const;

 private:
  KernelSpec spec_;
  SineGrid grid_;
  Eigen::MatrixXd spatial_proj_;  // (N x M): w sum_m e_j(x_m) k(x_m, y_l), product form only
};

HSMatrix kernel_G(const KernelSpec& spec, const SpectralField& u);

struct LipschitzCheck {
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0.0;  ///< max lhs / rhs
};
/// |g(x,y,z1) - g(x,y,z2)| <= L(x) |z1 - z2| on random triples.
LipschitzCheck check_kernel_profile(const KernelSpec& spec, int samples, std::uint64_t seed);
/// ||G(u1) - G(u2)||_{L2} <= ||L||_V ||u1 - u2|| on random pairs of fields.
LipschitzCheck check_hs_lipschitz(const KernelOperator& op, int samples, std::uint64_t seed,
                                  double slack = 1e-6);

/// Heat problem on (0, pi) with Dirichlet conditions, F = Nemytskii of f, G = kernel operator.
ProblemSpec build_heat_problem(const ScalarMap& f, const KernelSpec& kernel, const HolderParams& params,
                               double horizon, int n_steps, int n_modes, double trace_decay = 2.0);

}  // namespace pathwise
