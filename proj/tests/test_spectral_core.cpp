#include "pathwise/spectral_core.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace pathwise;

namespace {

SpectralOperator diag(std::vector<double> lam) {
  Eigen::VectorXd l = Eigen::Map<Eigen::VectorXd>(lam.data(), static_cast<Eigen::Index>(lam.size()));
  return SpectralOperator(l, Eigen::VectorXd::Ones(l.size()));
}

}  // namespace

TEST_CASE("semigroup_apply examples") {
  const auto op3 = diag({1, 4, 9});
  const SpectralField ones = SpectralField::Ones(3);
  CHECK((semigroup_apply(op3, 0.0, ones) - ones).norm() == 0.0);

  const auto op1 = diag({1});
  CHECK(semigroup_apply(op1, 1.0, SpectralField::Ones(1))(0) == doctest::Approx(0.367879).epsilon(1e-6));

  const auto op2 = diag({1, 4});
  SpectralField u(2);
  u << 2, 3;
  const auto v = semigroup_apply(op2, 0.5, u);
  CHECK(v(0) == doctest::Approx(2 * std::exp(-0.5)));
  CHECK(v(1) == doctest::Approx(3 * std::exp(-2.0)));

  CHECK_THROWS_AS(semigroup_apply(op2, -0.1, u), std::invalid_argument);
}

TEST_CASE("frac_power_norm examples") {
  SpectralField u(2);
  u << 3, 4;
  CHECK(frac_power_norm(diag({1, 4}), 0.0, u) == doctest::Approx(5.0));
  CHECK(frac_power_norm(diag({4}), 0.5, SpectralField::Ones(1)) == doctest::Approx(2.0));
  CHECK(frac_power_norm(diag({1, 4, 9}), 1.0, SpectralField::Ones(3)) == doctest::Approx(std::sqrt(98.0)));
  CHECK_THROWS(frac_power_norm(diag({1}), -0.5, SpectralField::Ones(1)));
}

TEST_CASE("operator validation") {
  CHECK_THROWS_AS(diag({0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(diag({4.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralOperator(Eigen::VectorXd::Ones(2), -Eigen::VectorXd::Ones(2)), std::invalid_argument);
  const auto lap = SpectralOperator::laplacian_1d(5);
  CHECK(lap.eigenvalues()(4) == doctest::Approx(25.0));
  CHECK(lap.trace_weights()(1) == doctest::Approx(0.25));
  CHECK(lap.truncated(3).n_modes() == 3);
}

TEST_CASE("verify_semigroup_bounds examples") {
  const auto op = SpectralOperator::laplacian_1d(10);
  const std::vector<double> t1 = {1.0};
  const auto rep = verify_semigroup_bounds(op, 1.0, t1);
  CHECK(rep.smoothing_norms[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(rep.envelope_holds);

  // gamma -> 0: sup_i e^{-lambda_i t} <= 1
  const std::vector<double> grid = {0.01, 0.1, 1.0};
  const auto small = verify_semigroup_bounds(op, 1e-9, grid);
  for (const double v : small.smoothing_norms) CHECK(v <= 1.0 + 1e-8);

  // (theta, sigma) = (0, 1): sup_i (1 - e^{-lambda_i t}) / lambda_i <= t
  bool found = false;
  for (const auto& e : rep.eq2) {
    if (e.theta == 0.0 && e.sigma == 1.0) {
      found = true;
      CHECK(e.within_unit_bound);
      CHECK(e.measured_constant <= 1.0);
    }
  }
  CHECK(found);
  CHECK_THROWS(verify_semigroup_bounds(op, 0.5, std::vector<double>{}));
}

TEST_CASE("semigroup law, monotone smoothing and envelope") {
  const auto op = SpectralOperator::laplacian_1d(32);
  SpectralField u(32);
  for (int i = 0; i < 32; ++i) u(i) = 1.0 / (1 + i);
  const std::vector<double> ts = {0.0, 0.01, 0.1, 0.5, 1.0};
  for (const double t : ts) {
    for (const double s : ts) {
      const auto a = semigroup_apply(op, t, semigroup_apply(op, s, u));
      const auto b = semigroup_apply(op, t + s, u);
      CHECK((a - b).norm() <= 1e-15 * (1.0 + b.norm()));
    }
  }
  for (const double delta : {0.0, 0.5, 1.0, 2.0}) {
    double prev = INFINITY;
    for (const double t : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const double v = frac_power_norm(op, delta, semigroup_apply(op, t, u));
      CHECK(std::isfinite(v));
      CHECK(v <= prev);
      prev = v;
    }
  }
  std::vector<double> grid;
  for (int k = 1; k <= 100; ++k) grid.push_back(0.01 * k);
  for (const double g : {0.25, 0.5, 1.0}) CHECK(verify_semigroup_bounds(op, g, grid).envelope_holds);
}
