#include "pathwise/path_io.hpp"
#include "pathwise/paths.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

using namespace pathwise;

namespace {

struct Moments {
  double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

SampledPath line(int n, double dt, double slope) {
  Eigen::MatrixXd v(n + 1, 1);
  for (int j = 0; j <= n; ++j) v(j, 0) = slope * j * dt;
  return SampledPath(dt, v);
}

}  // namespace

TEST_CASE("holder params validation") {
  HolderParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.valid());
  HolderParams bad = p;
  bad.beta = 0.7;  // beta > beta'
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.alpha = 0.3;  // alpha <= 1 - beta'
  CHECK_FALSE(bad.valid());
  bad = p;
  bad.hurst = 0.6;  // H <= beta'
  CHECK_FALSE(bad.valid());
}

TEST_CASE("fbm factor reproduces the covariance") {
  for (const double h : {0.6, 0.75, 0.9}) {
    const auto f = fbm_factor(h, 256, 1.0 / 256);
    CHECK(f->reconstruction_error() <= 1e-10);
  }
  CHECK(fbm_covariance(0.75, 2.0, 1.0) == doctest::Approx(0.5 * (std::pow(2.0, 1.5) + 1.0 - 1.0)));
  CHECK(fbm_factor(0.75, 64, 0.1).get() == fbm_factor(0.75, 64, 0.1).get());
  const auto two = fbm_factor_two_sided(0.7, 32, 1.0 / 32);
  CHECK(two->reconstruction_error() <= 1e-10);
  CHECK(two->times.size() == 64);
}

TEST_CASE("fbm Monte-Carlo moments") {
  const int n_samples = 10000;
  std::vector<double> at1, at2, half, prod, inc_a, inc_b;
  for (int k = 0; k < n_samples; ++k) {
    const auto p = sample_fbm_1d(0.75, 2, 1.0, mix_seed(11, k));
    at1.push_back(p.values()(1, 0));
    at2.push_back(p.values()(2, 0));
    prod.push_back(p.values()(1, 0) * p.values()(2, 0));
    const auto q = sample_fbm_1d(0.5, 4, 0.5, mix_seed(12, k));
    half.push_back(q.values()(1, 0));
    inc_a.push_back(q.values()(2, 0) - q.values()(1, 0));
    inc_b.push_back(q.values()(4, 0) - q.values()(3, 0));
  }
  const auto m1 = moments(at1);
  CHECK(std::abs(m1.var - 1.0) <= 3.0 * std::sqrt(2.0 / n_samples));
  // Cov(B(2), B(1)) = 2^{1.5}/2 for H = 0.75
  const auto mp = moments(prod);
  const double cov21 = fbm_covariance(0.75, 2.0, 1.0);
  CHECK(std::abs(mp.mean - cov21) <= 3.0 * std::sqrt(mp.var / n_samples));
  // self-similarity: Var B(0.5) = 0.5^{2H} for H = 1/2
  CHECK(std::abs(moments(half).var - 0.5) <= 3.0 * 0.5 * std::sqrt(2.0 / n_samples));
  // H = 1/2: disjoint increments uncorrelated
  std::vector<double> ab;
  for (int k = 0; k < n_samples; ++k) ab.push_back(inc_a[k] * inc_b[k]);
  const auto mab = moments(ab);
  CHECK(std::abs(mab.mean) <= 3.0 * std::sqrt(mab.var / n_samples));
}

TEST_CASE("two-sided fbm") {
  const auto p = sample_fbm_two_sided(0.7, 16, 1.0 / 16, 5);
  CHECK(p.t0() == doctest::Approx(-1.0));
  CHECK(p.t_end() == doctest::Approx(1.0));
  REQUIRE(p.origin_index().has_value());
  CHECK(p.values()(*p.origin_index(), 0) == 0.0);
  std::vector<double> neg;
  for (int k = 0; k < 4000; ++k) neg.push_back(sample_fbm_two_sided(0.7, 4, 0.25, mix_seed(3, k)).values()(0, 0));
  CHECK(std::abs(moments(neg).var - 1.0) <= 3.0 * std::sqrt(2.0 / 4000));
}

TEST_CASE("Q-fBm") {
  Eigen::VectorXd lam(3), q(3);
  lam << 1, 4, 9;
  q << 1, 0, 0;
  const auto only1 = sample_qfbm(SpectralOperator(lam, q), 0.7, 8, 0.125, 9);
  CHECK(only1.values().col(0).norm() > 0);
  CHECK(only1.values().col(1).norm() == 0.0);
  CHECK(only1.values().col(2).norm() == 0.0);

  q << 0.5, 0.25, 0.125;
  const SpectralOperator op(lam, q);
  const int ns = 6000;
  std::vector<double> sq, cross;
  for (int k = 0; k < ns; ++k) {
    const auto p = sample_qfbm(op, 0.7, 2, 0.5, mix_seed(21, k));
    const auto v = p.value(2);
    sq.push_back(v.squaredNorm());
    cross.push_back(v(0) * v(1));
  }
  const auto msq = moments(sq);
  CHECK(std::abs(msq.mean - 0.875) <= 3.0 * std::sqrt(msq.var / ns));
  const auto mc = moments(cross);
  CHECK(std::abs(mc.mean) <= 3.0 * std::sqrt(mc.var / ns));

  q.setZero();
  const SpectralOperator zero(lam, q);
  CHECK(degenerate_noise(zero));
  CHECK(sample_qfbm(zero, 0.7, 8, 0.125, 1).values().norm() == 0.0);

  // mode i uses stream i: adding modes leaves the first ones unchanged
  Eigen::VectorXd lam2(2), q2(2);
  lam2 << 1, 4;
  q2 << 0.5, 0.25;
  const auto a = sample_qfbm(SpectralOperator(lam2, q2), 0.7, 8, 0.125, 4);
  q << 0.5, 0.25, 0.125;
  const auto b = sample_qfbm(SpectralOperator(lam, q), 0.7, 8, 0.125, 4);
  CHECK((a.values() - b.values().leftCols(2)).norm() == 0.0);
  CHECK((sample_qfbm(op, 0.7, 8, 0.125, 4).values() - b.values()).norm() == 0.0);
}

TEST_CASE("wiener shift") {
  const auto w = sample_fbm_two_sided(0.75, 32, 1.0 / 32, 17);
  const auto s0 = wiener_shift(w, 0);
  CHECK((s0.values() - w.values()).norm() == 0.0);
  CHECK(s0.t0() == w.t0());

  const auto l = line(32, 1.0 / 32, 2.5);
  const auto ls = wiener_shift(l, 8);
  for (Eigen::Index j = 0; j < ls.n_nodes(); ++j) CHECK(ls.values()(j, 0) == doctest::Approx(2.5 * ls.time(j)));

  const auto ab = wiener_shift(wiener_shift(w, 5), 7);
  const auto direct = wiener_shift(w, 12);
  CHECK(ab.start_step() == direct.start_step());
  CHECK((ab.values() - direct.values()).cwiseAbs().maxCoeff() == 0.0);
  const auto back = wiener_shift(wiener_shift(w, 9), -9);
  CHECK((back.values() - w.values()).cwiseAbs().maxCoeff() == 0.0);

  const auto shifted = wiener_shift(w, 10);
  CHECK(shifted.values()(*shifted.origin_index(), 0) == 0.0);
  // increments are preserved
  const auto j0 = w.index_of(10.0 / 32);
  for (Eigen::Index j = 0; j + j0 + 1 < w.n_nodes(); ++j) {
    const double dw = w.values()(j0 + j + 1, 0) - w.values()(j0 + j, 0);
    const auto k = *shifted.origin_index() + j;
    CHECK(shifted.values()(k + 1, 0) - shifted.values()(k, 0) == doctest::Approx(dw).epsilon(1e-12));
  }
  const auto one_sided = sample_fbm_1d(0.75, 16, 1.0 / 16, 3);
  CHECK_THROWS(wiener_shift(one_sided, 17));
  CHECK_THROWS(wiener_shift(one_sided, -1));
  // seminorm of a shifted path equals the seminorm on the translated window
  CHECK(holder_seminorm(wiener_shift(one_sided, 4), 0.6, 0.0, 0.75) == doctest::Approx(holder_seminorm(one_sided, 0.6, 0.25, 1.0)));
}

TEST_CASE("holder seminorm examples") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(17, 1, 3.0);
  CHECK(holder_seminorm(SampledPath(1.0 / 16, c), 0.6) == 0.0);
  CHECK(holder_seminorm(line(64, 1.0 / 64, 1.0), 0.5) == doctest::Approx(1.0));
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  CHECK_THROWS(holder_seminorm(SampledPath(0.1, one), 0.5));

  const auto p = sample_fbm_1d(0.75, 64, 1.0 / 64, 8);
  const auto r = refine_fbm_midpoints(p, 0.75, 9);
  CHECK(r.n_steps() == 128);
  for (Eigen::Index j = 0; j < p.n_nodes(); ++j) CHECK(r.values()(2 * j, 0) == p.values()(j, 0));
  CHECK(holder_seminorm(r, 0.6) >= holder_seminorm(p, 0.6));
}

TEST_CASE("seminorm above H grows under refinement") {
  int grows = 0;
  const int trials = 20;
  for (int k = 0; k < trials; ++k) {
    auto p = sample_fbm_1d(0.6, 64, 1.0 / 64, mix_seed(31, k));
    const double coarse = holder_seminorm(p, 0.75);
    for (int l = 0; l < 4; ++l) p = refine_fbm_midpoints(p, 0.6, mix_seed(32 + l, k));
    if (holder_seminorm(p, 0.75) > coarse) ++grows;
  }
  CHECK(grows >= trials * 3 / 4);
}

TEST_CASE("weighted holder norm") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(9, 2, 0.0);
  c.col(0).setConstant(3.0);
  c.col(1).setConstant(4.0);
  CHECK(weighted_holder_norm(SampledPath(0.125, c), 0.6, 0.0) == doctest::Approx(5.0));

  const auto u = line(40, 1.0 / 40, 1.0);
  const double beta = 0.6, rho = 10.0;
  double sup0 = 0, semi = 0;
  for (int a = 0; a <= 40; ++a) {
    const double s = a / 40.0;
    sup0 = std::max(sup0, std::exp(-rho * s) * s);
    for (int b = a + 1; b <= 40; ++b) {
      const double t = b / 40.0;
      semi = std::max(semi, std::pow(s, beta) * std::exp(-rho * t) * (t - s) / std::pow(t - s, beta));
    }
  }
  CHECK(weighted_holder_norm(u, beta, rho) == doctest::Approx(sup0 + semi).epsilon(1e-12));

  const auto w = sample_qfbm(SpectralOperator::laplacian_1d(4), 0.75, 64, 1.0 / 64, 2);
  const double plain = weighted_holder_norm(w, beta, 0.0);
  for (const double r : {0.5, 2.0, 8.0}) {
    const double wn = weighted_holder_norm(w, beta, r);
    CHECK(wn <= plain * (1 + 1e-14));
    CHECK(wn * std::exp(r * 1.0) >= plain * (1 - 1e-14));
  }
}

TEST_CASE("wiener modulus") {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(33, 1, 1.0);
  CHECK(wiener_modulus(SampledPath(1.0 / 32, c), 0.6, 0.5).value == 0.0);
  const auto u = line(64, 1.0 / 64, 1.0);
  CHECK(wiener_modulus(u, 0.5, 0.25).value == doctest::Approx(0.5));
  const auto deg = wiener_modulus(u, 0.5, 0.001);
  CHECK(deg.degenerate);
  CHECK(deg.value == 0.0);

  const auto p = sample_fbm_1d(0.8, 256, 1.0 / 256, 41);
  double prev = 0.0;
  for (const double d : {0.01, 0.05, 0.1, 0.5, 1.0}) {
    const double v = wiener_modulus(p, 0.6, d).value;
    CHECK(v >= prev);
    prev = v;
  }
  int below = 0;
  for (int k = 0; k < 100; ++k) {
    const auto q = sample_fbm_1d(0.8, 256, 1.0 / 256, mix_seed(42, k));
    if (wiener_modulus(q, 0.6, 0.01).value < wiener_modulus(q, 0.6, 0.1).value) ++below;
  }
  CHECK(below > 50);
}

TEST_CASE("csv round trip") {
  const auto w = sample_qfbm_two_sided(SpectralOperator::laplacian_1d(3), 0.75, 8, 0.125, 6);
  std::stringstream ss;
  write_path_csv(ss, w, {"config_hash = abc", "x = 1"});
  CHECK(ss.str().rfind("# config_hash = abc", 0) == 0);
  const auto back = read_path_csv(ss);
  CHECK(back.start_step() == w.start_step());
  CHECK(back.dt() == w.dt());
  CHECK((back.values() - w.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(format_number(0.1) == "0.10000000000000001");
}
