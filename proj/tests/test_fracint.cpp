#include "pathwise/fracint.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

using namespace pathwise;

namespace {

SampledPath tabulate(int n, double dt, const std::function<double(double)>& f) {
  Eigen::MatrixXd v(n + 1, 1);
  for (int j = 0; j <= n; ++j) v(j, 0) = f(j * dt);
  return SampledPath(dt, v);
}

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

}  // namespace

TEST_CASE("left derivative examples") {
  const auto c = tabulate(16, 1.0 / 16, [](double) { return 3.0; });
  CHECK(frac_deriv_left(c, 0.5, 0.0, 1.0)(0) == doctest::Approx(3.0 * kInvSqrtPi).epsilon(1e-12));

  const auto lin = tabulate(16, 1.0 / 16, [](double q) { return q; });
  CHECK(frac_deriv_left(lin, 0.5, 0.0, 1.0)(0) == doctest::Approx(2.0 * kInvSqrtPi).epsilon(1e-12));

  // alpha -> 0 recovers g(r)
  const auto g = tabulate(64, 1.0 / 64, [](double q) { return 1.0 + std::sin(3 * q); });
  const double gr = 1.0 + std::sin(1.5);
  CHECK(std::abs(frac_deriv_left(g, 1e-3, 0.0, 0.5)(0) - gr) <= 0.01 * gr);

  CHECK_THROWS(frac_deriv_left(lin, 0.5, 0.5, 0.5));
  CHECK_THROWS(frac_deriv_left(lin, 1.5, 0.0, 0.5));
}

TEST_CASE("right derivative examples") {
  const auto c = tabulate(16, 1.0 / 16, [](double) { return -2.0; });
  CHECK(std::abs(frac_deriv_right(c, 0.5, 0.0, 1.0)(0)) <= 1e-14);

  const auto lin = tabulate(16, 1.0 / 16, [](double q) { return q; });
  CHECK(std::abs(frac_deriv_right(lin, 0.5, 0.0, 1.0)(0)) == doctest::Approx(2.0 * kInvSqrtPi).epsilon(1e-12));
  CHECK_THROWS(frac_deriv_right(lin, 0.5, 1.0, 1.0));

  HolderParams p;
  const int n = 256;
  const auto w = sample_fbm_1d(p.hurst, n, 1.0 / n, 77);
  const double semi = holder_seminorm(w, p.beta_prime);
  const double c0 = right_derivative_bound_constant(p);
  for (int j = 0; j < n; j += 3) {
    const double r = j * (1.0 / n);
    const double d = std::abs(frac_deriv_right(w, p.alpha, r, 1.0)(0));
    CHECK(d <= c0 * semi * std::pow(1.0 - r, p.alpha + p.beta_prime - 1.0));
  }
}

TEST_CASE("kernel weights") {
  const auto k = fractional_kernel(0.5, 100);
  CHECK(k->cells() >= 100);
  CHECK(std::abs(k->sign()) == 1.0);
  CHECK(integral_sign(0.5) == k->sign());
  // a constant integrand reproduces the increment of every cell
  for (Eigen::Index e = 0; e < 100; ++e) CHECK(k->start_weight(e) == doctest::Approx(1.0).epsilon(1e-12));
  // trapezoid weights: 1/2 on the own cell, 1 on later cells
  CHECK(k->increment_weight(0) == doctest::Approx(0.5).epsilon(1e-12));
  for (Eigen::Index e = 1; e < 100; ++e) CHECK(k->increment_weight(e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fractional_kernel(0.5, 10).get() == fractional_kernel(0.5, 10).get());
}

TEST_CASE("integral examples") {
  HolderParams p;
  const int n = 64;
  const auto w = sample_fbm_1d(p.hurst, n, 1.0 / n, 3);
  const auto c = tabulate(n, 1.0 / n, [](double) { return 2.5; });
  CHECK(pathwise_integral(c, w, p, 0.0, 1.0) == doctest::Approx(2.5 * w.values()(n, 0)).epsilon(1e-12));

  const auto r = tabulate(n, 1.0 / n, [](double q) { return q; });
  CHECK(pathwise_integral(r, r, p, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-13));

  const int m = 1 << 12;
  const auto rr = tabulate(m, 1.0 / m, [](double q) { return q; });
  const auto sq = tabulate(m, 1.0 / m, [](double q) { return q * q; });
  CHECK(std::abs(pathwise_integral(rr, sq, p, 0.0, 1.0) - 2.0 / 3.0) <= 1e-3);

  HolderParams bad = p;
  bad.alpha = 0.3;
  CHECK_THROWS(pathwise_integral(c, w, bad, 0.0, 1.0));
  CHECK_THROWS(pathwise_integral(c, w, p, 0.5, 0.5));
  CHECK_THROWS(pathwise_integral(c, w, p, 0.0, 1.5));
}

TEST_CASE("kernel route agrees with the reference route") {
  HolderParams p;
  const int n = 64;
  const auto op = SpectralOperator::laplacian_1d(3);
  const auto w = sample_qfbm(op, p.hurst, n, 1.0 / n, 19);
  const auto u = sample_qfbm(op, p.hurst, n, 1.0 / n, 20);
  std::vector<HSMatrix> vals;
  for (int j = 0; j <= n; ++j) {
    HSMatrix g(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) g(a, b) = std::sin(u.values()(j, a) + 0.3 * b) / (1 + a + b);
    vals.push_back(g);
  }
  const IntegrandPath g(1.0 / n, vals);
  for (const auto& [s, t] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.25, 0.75}, {0.5, 0.515625}}) {
    const auto a = pathwise_integral(g, w, p, s, t);
    const auto b = pathwise_integral_reference(g, w, p, s, t);
    CHECK((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
  }
}

TEST_CASE("additivity, bilinearity and the norm bound") {
  HolderParams p;
  const int n = 128;
  const auto w = sample_fbm_1d(p.hurst, n, 1.0 / n, 5);
  const auto w2 = sample_fbm_1d(p.hurst, n, 1.0 / n, 6);
  const auto g = sample_fbm_1d(p.hurst, n, 1.0 / n, 7);
  const auto h = tabulate(n, 1.0 / n, [](double q) { return std::cos(5 * q); });

  const double whole = pathwise_integral(g, w, p, 0.0, 1.0);
  const double split = pathwise_integral(g, w, p, 0.0, 0.375) + pathwise_integral(g, w, p, 0.375, 1.0);
  CHECK(std::abs(whole - split) <= 1e-12 * (1.0 + std::abs(whole)));

  const SampledPath gh(1.0 / n, 2.0 * g.values() - 3.0 * h.values());
  const double lhs = pathwise_integral(gh, w, p, 0.0, 1.0);
  const double rhs = 2.0 * whole - 3.0 * pathwise_integral(h, w, p, 0.0, 1.0);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));

  const SampledPath ww(1.0 / n, w.values() + 0.5 * w2.values());
  const double l2 = pathwise_integral(g, ww, p, 0.0, 1.0);
  const double r2 = whole + 0.5 * pathwise_integral(g, w2, p, 0.0, 1.0);
  CHECK(std::abs(l2 - r2) <= 1e-12 * (1.0 + std::abs(l2)));

  // shift: integrating over [s, t] equals integrating the translated paths over [0, t - s]
  const auto gs = SampledPath(1.0 / n, g.values().bottomRows(n / 2 + 1));
  const auto ws = SampledPath(1.0 / n, w.values().bottomRows(n / 2 + 1));
  CHECK(pathwise_integral(gs, ws, p, 0.0, 0.5) == doctest::Approx(pathwise_integral(g, w, p, 0.5, 1.0)).epsilon(1e-12));

  const double c = integral_bound_constant(p);
  for (const auto& [s, t] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.25, 0.5}, {0.5, 0.625}}) {
    const double v = std::abs(pathwise_integral(g, w, p, s, t));
    const double gn = holder_beta_norm(IntegrandPath::from_scalar(g), p.beta, s, t);
    CHECK(v <= c * gn * holder_seminorm(w, p.beta_prime, s, t) * std::pow(t - s, p.beta_prime));
  }
}

TEST_CASE("Young agreement for smooth drivers") {
  HolderParams p;
  const double exact = 0.5 + std::sin(2.0) / 4.0;
  std::vector<double> err;
  for (const int n : {32, 64, 128, 256}) {
    const auto g = tabulate(n, 1.0 / n, [](double q) { return std::cos(q); });
    const auto w = tabulate(n, 1.0 / n, [](double q) { return std::sin(q); });
    err.push_back(std::abs(pathwise_integral(g, w, p, 0.0, 1.0) - exact));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.0);
}

TEST_CASE("cumulative integrator") {
  HolderParams p;
  const int n = 64;
  const auto w = sample_fbm_1d(p.hurst, n, 1.0 / n, 13);
  const auto h = sample_fbm_1d(p.hurst, n, 1.0 / n, 14);
  CumulativeIntegrator ci(w, p.alpha);
  for (int b = 1; b <= n; ++b) {
    ci.advance();
    CHECK(ci.position() == b);
    double v = h.values()(0, 0) * ci.start_weight(0);
    const auto inc = ci.increment_weights(0);
    for (int q = 0; q < b; ++q) v += (h.values()(q + 1, 0) - h.values()(q, 0)) * inc[static_cast<std::size_t>(q)];
    CHECK(v == doctest::Approx(pathwise_integral(h, w, p, 0.0, b * (1.0 / n))).epsilon(1e-11));
  }
  CHECK_THROWS(ci.advance());
}
