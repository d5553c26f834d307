#pragma once

#include "pathwise/spectral_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace pathwise {

/// Exponent quadruple with 1/2 < beta < beta' < H < 1 and 1 - beta' < alpha < beta.
struct HolderParams {
  double hurst = 0.75;
  double beta = 0.55;
  double beta_prime = 0.65;
  double alpha = 0.5;

  /// Throws std::invalid_argument naming the first violated inequality.
  void validate() const;
  bool valid() const noexcept;
};

/// A function on the uniform lattice t_j = (start_step + j) * dt, j = 0..n_nodes-1, with
/// values in R^N (row j holds the N eigen-coefficients at t_j).
///
/// Paths remember the raw samples they were cut from, so that Wiener shifts compose
/// bit-exactly: every shifted value is computed as root(k) - root(anchor) from the
/// original samples instead of re-differencing already shifted values.
class SampledPath {
 public:
  SampledPath() = default;
  SampledPath(double dt, Eigen::MatrixXd values, std::int64_t start_step = 0);

  double dt() const { return dt_; }
  std::int64_t start_step() const { return start_step_; }
  double t0() const { return static_cast<double>(start_step_) * dt_; }
  double t_end() const { return time(n_nodes() - 1); }
  double time(Eigen::Index j) const { return static_cast<double>(start_step_ + j) * dt_; }

  Eigen::Index n_nodes() const { return values_.rows(); }
  Eigen::Index n_steps() const { return values_.rows() - 1; }
  int n_modes() const { return static_cast<int>(values_.cols()); }

  const Eigen::MatrixXd& values() const { return values_; }
  SpectralField value(Eigen::Index j) const { return values_.row(j).transpose(); }
  /// Contiguous view of one mode's node values.
  std::span<const double> mode(int i) const {
    return {values_.col(i).data(), static_cast<std::size_t>(values_.rows())};
  }

  /// Node index of time t; throws when t is not a lattice point inside the window.
  Eigen::Index index_of(double t) const;
  /// Node index of the lattice time 0, if it lies in the window.
  std::optional<Eigen::Index> origin_index() const;

  /// Nodes first..last (inclusive), keeping lattice position and lineage.
  SampledPath restrict(Eigen::Index first, Eigen::Index last) const;
  /// The part of the window at nonnegative times, re-based so that node 0 is t = 0.
  SampledPath forward_part() const;
  /// Same values on the window translated to start at t = 0 (no change of values).
  SampledPath rebased() const;

  bool same_grid(const SampledPath& other) const;

 private:
  friend SampledPath wiener_shift(const SampledPath& omega, std::int64_t shift_steps);

  double dt_ = 1.0;
  std::int64_t start_step_ = 0;
  Eigen::MatrixXd values_;
  // lineage: values_ == root_->middleRows(root_first_, n) - root_->row(root_anchor_) (if any)
  std::shared_ptr<const Eigen::MatrixXd> root_;
  Eigen::Index root_first_ = 0;
  std::optional<Eigen::Index> root_anchor_;
};

/// 1/2 (|t|^{2H} + |s|^{2H} - |t-s|^{2H}).
double fbm_covariance(double hurst, double t, double s);

/// Lower Cholesky factor of the fBm covariance on the nonzero nodes of a grid.
struct FbmFactor {
  double hurst = 0.0;
  double dt = 0.0;
  std::vector<double> times;  ///< nonzero grid times, in node order
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd lower;

  /// max_{jk} |(L L^T - C)_{jk}|
  double reconstruction_error() const;
};

/// Factor for the one-sided grid {k dt : k = 1..n_steps}. Cached behind an immutable
/// handle keyed by (H, n_steps, dt). Throws std::runtime_error if the factorization fails.
std::shared_ptr<const FbmFactor> fbm_factor(double hurst, int n_steps, double dt);
/// Factor for the two-sided grid {k dt : k = -n_side..n_side, k != 0}.
std::shared_ptr<const FbmFactor> fbm_factor_two_sided(double hurst, int n_side, double dt);

/// Deterministic 64-bit seed mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Exact scalar fBm on [0, n_steps dt] (one mode), zero at t = 0.
SampledPath sample_fbm_1d(double hurst, int n_steps, double dt, std::uint64_t seed);

/// Exact two-sided scalar fBm on [-n_side dt, n_side dt], zero at t = 0.
SampledPath sample_fbm_two_sided(double hurst, int n_side, double dt, std::uint64_t seed);

/// Q-fBm: mode i carries sqrt(q_i) times an independent scalar fBm seeded by mix_seed(seed, i).
/// A zero-trace Q gives the zero path; check `degenerate_noise` to detect it.
SampledPath sample_qfbm(const SpectralOperator& op, double hurst, int n_steps, double dt,
                        std::uint64_t seed);
SampledPath sample_qfbm_two_sided(const SpectralOperator& op, double hurst, int n_side,
                                  double dt, std::uint64_t seed);
bool degenerate_noise(const SpectralOperator& op);

/// Doubles the resolution of a one-sided scalar fBm path by drawing the midpoints from
/// their exact conditional law given the existing nodes.
SampledPath refine_fbm_midpoints(const SampledPath& path, double hurst, std::uint64_t seed);

/// theta_tau omega(.) = omega(tau + .) - omega(tau), tau = shift_steps * dt. The window is
/// translated by -tau; tau must be a node of the window. Negative shifts need a two-sided path.
SampledPath wiener_shift(const SampledPath& omega, std::int64_t shift_steps);

/// max over nodes s <= t_j < t_k <= t of |u(t_k) - u(t_j)| / (t_k - t_j)^beta.
double holder_seminorm(const SampledPath& u, double beta, double s, double t);
/// Same over the whole window.
double holder_seminorm(const SampledPath& u, double beta);

/// ||u||_{beta,beta;rho} on the path's window [T1, T2]:
/// sup e^{-rho(s-T1)}|u(s)| + sup_{T1<s<t} (s-T1)^beta e^{-rho(t-T1)} |u(t)-u(s)| / (t-s)^beta.
double weighted_holder_norm(const SampledPath& u, double beta, double rho);
/// ||u||_{beta,beta}, i.e. rho = 0.
inline double holder_beta_norm(const SampledPath& u, double beta) {
  return weighted_holder_norm(u, beta, 0.0);
}

struct ModulusResult {
  double value = 0.0;
  /// delta shorter than one grid step: no admissible pair, value 0.
  bool degenerate = false;
};

/// sup over node pairs with 0 < t - s <= delta of |u(t) - u(s)| / (t - s)^beta.
ModulusResult wiener_modulus(const SampledPath& u, double beta, double delta);

}  // namespace pathwise
