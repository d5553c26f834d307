#include "pathwise/paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace pathwise {

void HolderParams::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("HolderParams: violated " + what);
  };
  if (!(0.5 < beta)) fail("1/2 < beta");
  if (!(beta < beta_prime)) fail("beta < beta'");
  if (!(beta_prime < hurst)) fail("beta' < H");
  if (!(hurst < 1.0)) fail("H < 1");
  if (!(1.0 - beta_prime < alpha)) fail("1 - beta' < alpha");
  if (!(alpha < beta)) fail("alpha < beta");
}

bool HolderParams::valid() const noexcept {
  return 0.5 < beta && beta < beta_prime && beta_prime < hurst && hurst < 1.0 &&
         1.0 - beta_prime < alpha && alpha < beta;
}

// ---------------------------------------------------------------------------

SampledPath::SampledPath(double dt, Eigen::MatrixXd values, std::int64_t start_step)
    : dt_(dt), start_step_(start_step), values_(std::move(values)) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("SampledPath: dt must be positive");
  if (values_.rows() < 2) throw std::invalid_argument("SampledPath: need at least 2 nodes");
  if (values_.cols() < 1) throw std::invalid_argument("SampledPath: need at least one mode");
  root_ = std::make_shared<const Eigen::MatrixXd>(values_);
}

Eigen::Index SampledPath::index_of(double t) const {
  const double k = std::round(t / dt_);
  if (std::abs(t - k * dt_) > 1e-9 * dt_ + 1e-12 * std::abs(t)) {
    std::ostringstream msg;
    msg << "SampledPath: time " << t << " is not a grid node (dt = " << dt_ << ")";
    throw std::invalid_argument(msg.str());
  }
  const auto j = static_cast<std::int64_t>(k) - start_step_;
  if (j < 0 || j >= n_nodes()) {
    std::ostringstream msg;
    msg << "SampledPath: time " << t << " outside window [" << t0() << ", " << t_end() << "]";
    throw std::out_of_range(msg.str());
  }
  return static_cast<Eigen::Index>(j);
}

std::optional<Eigen::Index> SampledPath::origin_index() const {
  const auto j = -start_step_;
  if (j < 0 || j >= n_nodes()) return std::nullopt;
  return static_cast<Eigen::Index>(j);
}

SampledPath SampledPath::restrict(Eigen::Index first, Eigen::Index last) const {
  if (first < 0 || last >= n_nodes() || last - first < 1)
    throw std::out_of_range("SampledPath::restrict: need at least 2 nodes inside the window");
  SampledPath out;
  out.dt_ = dt_;
  out.start_step_ = start_step_ + first;
  out.values_ = values_.middleRows(first, last - first + 1);
  out.root_ = root_;
  out.root_first_ = root_first_ + first;
  out.root_anchor_ = root_anchor_;
  return out;
}

SampledPath SampledPath::forward_part() const {
  const auto origin = origin_index();
  if (!origin) throw std::out_of_range("SampledPath::forward_part: t = 0 not in window");
  return restrict(*origin, n_nodes() - 1);
}

SampledPath SampledPath::rebased() const {
  SampledPath out = *this;
  out.start_step_ = 0;
  return out;
}

bool SampledPath::same_grid(const SampledPath& other) const {
  return dt_ == other.dt_ && start_step_ == other.start_step_ && n_nodes() == other.n_nodes();
}

SampledPath wiener_shift(const SampledPath& omega, std::int64_t shift_steps) {
  const std::int64_t j = shift_steps - omega.start_step_;
  if (j < 0 || j >= omega.n_nodes()) {
    std::ostringstream msg;
    msg << "wiener_shift: shift " << shift_steps << " steps leaves the sampled window";
    throw std::out_of_range(msg.str());
  }
  SampledPath out;
  out.dt_ = omega.dt_;
  out.start_step_ = omega.start_step_ - shift_steps;
  out.root_ = omega.root_;
  out.root_first_ = omega.root_first_;
  out.root_anchor_ = omega.root_first_ + static_cast<Eigen::Index>(j);
  const Eigen::RowVectorXd anchor = omega.root_->row(*out.root_anchor_);
  out.values_ = omega.root_->middleRows(out.root_first_, omega.n_nodes()).rowwise() - anchor;
  return out;
}

// ---------------------------------------------------------------------------

double fbm_covariance(double hurst, double t, double s) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(t), h2) + std::pow(std::abs(s), h2) -
                std::pow(std::abs(t - s), h2));
}

double FbmFactor::reconstruction_error() const {
  return (lower * lower.transpose() - covariance).cwiseAbs().maxCoeff();
}

namespace {

std::shared_ptr<const FbmFactor> build_factor(double hurst, double dt, std::vector<double> times) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fBm: H must lie in (0,1)");
  auto f = std::make_shared<FbmFactor>();
  f->hurst = hurst;
  f->dt = dt;
  f->times = std::move(times);
  const auto n = static_cast<Eigen::Index>(f->times.size());
  f->covariance.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double c = fbm_covariance(hurst, f->times[j], f->times[k]);
      f->covariance(j, k) = c;
      f->covariance(k, j) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(f->covariance);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fBm: covariance matrix is not positive definite");
  f->lower = llt.matrixL();
  return f;
}

using FactorKey = std::tuple<double, int, double, bool>;

std::shared_ptr<const FbmFactor> cached_factor(double hurst, int n, double dt, bool two_sided) {
  static std::mutex mutex;
  static std::map<FactorKey, std::shared_ptr<const FbmFactor>> cache;
  const FactorKey key{hurst, n, dt, two_sided};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<double> times;
  if (two_sided) {
    for (int k = -n; k <= n; ++k) {
      if (k != 0) times.push_back(k * dt);
    }
  } else {
    for (int k = 1; k <= n; ++k) times.push_back(k * dt);
  }
  auto f = build_factor(hurst, dt, std::move(times));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(f)).first->second;
}

Eigen::VectorXd standard_normals(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

void check_grid(int n_steps, double dt) {
  if (n_steps < 1) throw std::invalid_argument("fBm: n_steps must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("fBm: dt must be positive");
}

}  // namespace

std::shared_ptr<const FbmFactor> fbm_factor(double hurst, int n_steps, double dt) {
  check_grid(n_steps, dt);
  return cached_factor(hurst, n_steps, dt, false);
}

std::shared_ptr<const FbmFactor> fbm_factor_two_sided(double hurst, int n_side, double dt) {
  check_grid(n_side, dt);
  return cached_factor(hurst, n_side, dt, true);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(seed ^ splitmix(stream + 0x632be59bd9b4e019ULL));
}

SampledPath sample_fbm_1d(double hurst, int n_steps, double dt, std::uint64_t seed) {
  const auto factor = fbm_factor(hurst, n_steps, dt);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n_steps + 1, 1);
  values.col(0).tail(n_steps) = factor->lower * standard_normals(n_steps, seed);
  return SampledPath(dt, std::move(values), 0);
}

SampledPath sample_fbm_two_sided(double hurst, int n_side, double dt, std::uint64_t seed) {
  const auto factor = fbm_factor_two_sided(hurst, n_side, dt);
  const Eigen::VectorXd x = factor->lower * standard_normals(2 * n_side, seed);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2 * n_side + 1, 1);
  values.col(0).head(n_side) = x.head(n_side);
  values.col(0).tail(n_side) = x.tail(n_side);
  return SampledPath(dt, std::move(values), -n_side);
}

bool degenerate_noise(const SpectralOperator& op) { return op.trace() == 0.0; }

namespace {

template <class Sampler>
SampledPath sample_modes(const SpectralOperator& op, Eigen::Index n_nodes, double dt,
                         std::int64_t start, std::uint64_t seed, Sampler&& one_mode) {
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n_nodes, op.n_modes());
  for (int i = 0; i < op.n_modes(); ++i) {
    const double q = op.trace_weights()(i);
    if (q == 0.0) continue;
    values.col(i) = std::sqrt(q) * one_mode(mix_seed(seed, static_cast<std::uint64_t>(i))).values().col(0);
  }
  return SampledPath(dt, std::move(values), start);
}

}  // namespace

SampledPath sample_qfbm(const SpectralOperator& op, double hurst, int n_steps, double dt,
                        std::uint64_t seed) {
  check_grid(n_steps, dt);
  return sample_modes(op, n_steps + 1, dt, 0, seed, [&](std::uint64_t s) {
    return sample_fbm_1d(hurst, n_steps, dt, s);
  });
}

SampledPath sample_qfbm_two_sided(const SpectralOperator& op, double hurst, int n_side,
                                  double dt, std::uint64_t seed) {
  check_grid(n_side, dt);
  return sample_modes(op, 2 * n_side + 1, dt, -n_side, seed, [&](std::uint64_t s) {
    return sample_fbm_two_sided(hurst, n_side, dt, s);
  });
}

SampledPath refine_fbm_midpoints(const SampledPath& path, double hurst, std::uint64_t seed) {
  if (path.start_step() != 0 || path.n_modes() != 1)
    throw std::invalid_argument("refine_fbm_midpoints: expects a one-sided scalar path");
  const Eigen::Index n = path.n_steps();
  const double h = 0.5 * path.dt();
  // fine nonzero times k h, k = 1..2n; old nodes at even k, new at odd k
  Eigen::MatrixXd c_oo(n, n), c_no(n, n), c_nn(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double t_new_a = (2 * a + 1) * h;
    const double t_old_a = (2 * a + 2) * h;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double t_new_b = (2 * b + 1) * h;
      const double t_old_b = (2 * b + 2) * h;
      c_oo(a, b) = fbm_covariance(hurst, t_old_a, t_old_b);
      c_no(a, b) = fbm_covariance(hurst, t_new_a, t_old_b);
      c_nn(a, b) = fbm_covariance(hurst, t_new_a, t_new_b);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt_oo(c_oo);
  if (llt_oo.info() != Eigen::Success)
    throw std::runtime_error("refine_fbm_midpoints: observed covariance not positive definite");
  const Eigen::VectorXd x_old = path.values().col(0).tail(n);
  const Eigen::VectorXd mean = c_no * llt_oo.solve(x_old);
  Eigen::MatrixXd cond = c_nn - c_no * llt_oo.solve(c_no.transpose());
  cond = 0.5 * (cond + cond.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt_c(cond);
  if (llt_c.info() != Eigen::Success)
    throw std::runtime_error("refine_fbm_midpoints: conditional covariance not positive definite");
  const Eigen::VectorXd mid = mean + Eigen::MatrixXd(llt_c.matrixL()) * standard_normals(n, seed);

  Eigen::MatrixXd fine(2 * n + 1, 1);
  for (Eigen::Index k = 0; k <= n; ++k) fine(2 * k, 0) = path.values()(k, 0);
  for (Eigen::Index k = 0; k < n; ++k) fine(2 * k + 1, 0) = mid(k);
  return SampledPath(h, std::move(fine), 0);
}

// ---------------------------------------------------------------------------

namespace {

double max_quotient(const SampledPath& u, double beta, Eigen::Index a, Eigen::Index b,
                    Eigen::Index max_gap) {
  const auto& v = u.values();
  std::vector<double> inv_gap_pow(static_cast<std::size_t>(max_gap) + 1, 0.0);
  for (Eigen::Index g = 1; g <= max_gap; ++g) inv_gap_pow[g] = std::pow(g * u.dt(), -beta);
  double best = 0.0;
  for (Eigen::Index j = a; j < b; ++j) {
    const Eigen::Index kmax = std::min(b, j + max_gap);
    for (Eigen::Index k = j + 1; k <= kmax; ++k) {
      const double d = (v.row(k) - v.row(j)).norm();
      best = std::max(best, d * inv_gap_pow[k - j]);
    }
  }
  return best;
}

}  // namespace

double holder_seminorm(const SampledPath& u, double beta, double s, double t) {
  if (!(s < t)) throw std::invalid_argument("holder_seminorm: need s < t");
  const auto a = u.index_of(s);
  const auto b = u.index_of(t);
  if (b - a < 1) throw std::invalid_argument("holder_seminorm: fewer than 2 nodes in [s,t]");
  return max_quotient(u, beta, a, b, b - a);
}

double holder_seminorm(const SampledPath& u, double beta) {
  return max_quotient(u, beta, 0, u.n_nodes() - 1, u.n_nodes() - 1);
}

double weighted_holder_norm(const SampledPath& u, double beta, double rho) {
  if (rho < 0.0) throw std::invalid_argument("weighted_holder_norm: rho must be >= 0");
  const auto& v = u.values();
  const Eigen::Index n = u.n_nodes();
  const double dt = u.dt();
  std::vector<double> damp(n), inv_gap_pow(n, 0.0), left_weight(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    damp[k] = std::exp(-rho * k * dt);
    left_weight[k] = std::pow(k * dt, beta);
    if (k > 0) inv_gap_pow[k] = std::pow(k * dt, -beta);
  }
  double sup_term = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) sup_term = std::max(sup_term, damp[k] * v.row(k).norm());
  double holder_term = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double w = left_weight[j] * damp[k] * inv_gap_pow[k - j];
      if (w == 0.0) continue;
      holder_term = std::max(holder_term, w * (v.row(k) - v.row(j)).norm());
    }
  }
  return sup_term + holder_term;
}

ModulusResult wiener_modulus(const SampledPath& u, double beta, double delta) {
  const double span = u.t_end() - u.t0();
  if (!(delta > 0.0) || delta > span * (1.0 + 1e-12))
    throw std::invalid_argument("wiener_modulus: need 0 < delta <= window length");
  const auto max_gap = static_cast<Eigen::Index>(std::floor(delta / u.dt() + 1e-9));
  if (max_gap < 1) return {0.0, true};
  return {max_quotient(u, beta, 0, u.n_nodes() - 1, max_gap), false};
}

}  // namespace pathwise
