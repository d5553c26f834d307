#include "pathwise/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathwise {

SpectralOperator::SpectralOperator(Eigen::VectorXd eigenvalues, Eigen::VectorXd trace_weights)
    : eigenvalues_(std::move(eigenvalues)), trace_weights_(std::move(trace_weights)) {
  if (eigenvalues_.size() == 0) throw std::invalid_argument("SpectralOperator: no modes");
  if (trace_weights_.size() != eigenvalues_.size())
    throw std::invalid_argument("SpectralOperator: trace weight count differs from mode count");
  if (!(eigenvalues_(0) > 0.0))
    throw std::invalid_argument("SpectralOperator: lambda_1 must be strictly positive");
  for (Eigen::Index i = 1; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_(i) < eigenvalues_(i - 1))
      throw std::invalid_argument("SpectralOperator: eigenvalues must be nondecreasing");
  }
  for (Eigen::Index i = 0; i < trace_weights_.size(); ++i) {
    if (!(trace_weights_(i) >= 0.0) || !std::isfinite(trace_weights_(i)))
      throw std::invalid_argument("SpectralOperator: trace weights must be finite and >= 0");
  }
}

SpectralOperator SpectralOperator::laplacian_1d(int n_modes, double length, double trace_decay) {
  if (n_modes <= 0) throw std::invalid_argument("laplacian_1d: n_modes must be positive");
  if (!(length > 0.0)) throw std::invalid_argument("laplacian_1d: length must be positive");
  Eigen::VectorXd lambda(n_modes), q(n_modes);
  const double k = M_PI / length;
  for (int i = 0; i < n_modes; ++i) {
    const double m = i + 1.0;
    lambda(i) = (m * k) * (m * k);
    q(i) = std::pow(m, -trace_decay);
  }
  return SpectralOperator(std::move(lambda), std::move(q));
}

SpectralOperator SpectralOperator::truncated(int n) const {
  if (n <= 0 || n > n_modes()) throw std::invalid_argument("truncated: bad mode count");
  return SpectralOperator(eigenvalues_.head(n), trace_weights_.head(n));
}

SpectralField semigroup_apply(const SpectralOperator& op, double t, const SpectralField& u) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: negative time");
  if (u.size() != op.n_modes())
    throw std::invalid_argument("semigroup_apply: field has wrong number of modes");
  if (t == 0.0) return u;
  return ((-t) * op.eigenvalues().array()).exp().matrix().cwiseProduct(u);
}

double frac_power_norm(const SpectralOperator& op, double delta, const SpectralField& u) {
  if (delta < 0.0) throw std::invalid_argument("frac_power_norm: delta must be >= 0");
  if (u.size() != op.n_modes())
    throw std::invalid_argument("frac_power_norm: field has wrong number of modes");
  if (delta == 0.0) return u.norm();
  return op.eigenvalues().array().pow(delta).matrix().cwiseProduct(u).norm();
}

SemigroupBoundReport verify_semigroup_bounds(const SpectralOperator& op, double gamma,
                                             std::span<const double> t_grid, double beta) {
  if (t_grid.empty()) throw std::invalid_argument("verify_semigroup_bounds: empty grid");
  if (!(gamma > 0.0)) throw std::invalid_argument("verify_semigroup_bounds: gamma must be > 0");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("verify_semigroup_bounds: grid times must be > 0");
  }
  const auto& lambda = op.eigenvalues();
  const double lambda1 = op.lambda_min();

  SemigroupBoundReport rep;
  rep.gamma = gamma;
  for (double t : t_grid) {
    double sup = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      sup = std::max(sup, std::pow(lambda(i), gamma) * std::exp(-lambda(i) * t));
    }
    const double env = std::pow(gamma / (M_E * t), gamma);
    rep.smoothing_norms.push_back(sup);
    rep.envelope.push_back(env);
    rep.max_envelope_ratio = std::max(rep.max_envelope_ratio, sup / env);
    rep.measured_cs = std::max(rep.measured_cs, std::pow(t, gamma) * std::exp(lambda1 * t) * sup);
  }
  rep.envelope_holds = rep.max_envelope_ratio <= 1.0 + 1e-12;

  const double pairs[3][2] = {{0.0, 1.0}, {0.0, beta}, {beta, 1.0}};
  for (const auto& p : pairs) {
    Eq2Check chk;
    chk.theta = p[0];
    chk.sigma = p[1];
    const double gap = chk.sigma - chk.theta;
    for (double t : t_grid) {
      double sup = 0.0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        sup = std::max(sup, -std::expm1(-lambda(i) * t) * std::pow(lambda(i), -gap));
      }
      chk.measured_constant = std::max(chk.measured_constant, sup / std::pow(t, gap));
    }
    chk.within_unit_bound = chk.measured_constant <= 1.0 + 1e-12;
    rep.eq2.push_back(chk);
  }
  return rep;
}

}  // namespace pathwise
