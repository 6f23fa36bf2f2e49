#include "boop/chib.hpp"

#include <doctest.h>

#include <cmath>

#include "boop/rng.hpp"
#include "boop/toy_models.hpp"
#include "support/oracles.hpp"

using namespace boop;

namespace {

ThreeBlockGaussianToy make_toy(std::uint64_t seed, int t = 20) {
  RngStream rng(seed);
  Eigen::Vector3d tau_sq(1.0, 0.5, 0.25);
  const double level = rng.normal() * std::sqrt(tau_sq.sum());
  Eigen::VectorXd y(t);
  for (int i = 0; i < t; ++i) y[i] = level + rng.normal();
  return ThreeBlockGaussianToy(y, 1.0, tau_sq);
}

HSeries series_from(const std::vector<double>& h1,
                    const std::vector<double>& h2) {
  HSeries h;
  h.h1 = h1;
  h.h2 = h2;
  return h;
}

}  // namespace

TEST_CASE("full Gibbs run: determinism and burn-in accounting") {
  const auto toy = make_toy(1);
  RngStream rng_a(42), rng_b(42);
  const DrawStore a = run_full_gibbs(toy, 200, 50, rng_a);
  const DrawStore b = run_full_gibbs(toy, 200, 50, rng_b);
  REQUIRE(a.size() == 150);
  REQUIRE(b.size() == 150);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int blk = 0; blk < 3; ++blk) {
      CHECK(a.draws[i][blk][0] == b.draws[i][blk][0]);
    }
  }

  RngStream rng_c(3);
  CHECK(run_full_gibbs(toy, 200, 199, rng_c).size() == 1);
  RngStream rng_d(3);
  CHECK_THROWS_AS(run_full_gibbs(toy, 100, 100, rng_d), NumericalError);
}

TEST_CASE("independent blocks draw iid from their marginals") {
  const Eigen::Vector3d means(1.0, -2.0, 0.5);
  const Eigen::Vector3d vars(0.5, 2.0, 1.0);
  IndependentBlocksModel model(means, vars);
  RngStream rng(7);
  const long g = 4000, burn = 100;
  const DrawStore draws = run_full_gibbs(model, g, burn, rng);
  const double n = static_cast<double>(draws.size());
  for (int b = 0; b < 3; ++b) {
    double mean = 0.0;
    for (const auto& d : draws.draws) mean += d[b][0];
    mean /= n;
    CHECK(std::abs(mean - means[b]) <= 4.0 * std::sqrt(vars[b] / n));
  }
}

TEST_CASE("anchor selection is the retained-draw mean") {
  const auto toy = make_toy(2);
  DrawStore store;
  BlockState s1 = toy.initial_state();
  s1[0][0] = -0.7;
  store.draws.push_back(s1);
  CHECK(select_theta_star(store)[0][0] == doctest::Approx(-0.7));

  BlockState s2 = s1;
  s2[0][0] = 0.7;
  store.draws.push_back(s2);
  CHECK(select_theta_star(store)[0][0] == doctest::Approx(0.0));

  DrawStore stuck;
  for (int i = 0; i < 5; ++i) stuck.draws.push_back(s1);
  CHECK(select_theta_star(stuck)[0][0] == doctest::Approx(-0.7));

  CHECK_THROWS_AS(select_theta_star(DrawStore{}), NumericalError);
}

TEST_CASE("reduced run leaves independent-block marginals unchanged") {
  const Eigen::Vector3d means(0.3, 1.5, -1.0);
  const Eigen::Vector3d vars(1.0, 0.25, 0.75);
  IndependentBlocksModel model(means, vars);
  RngStream rng(9);
  const Eigen::VectorXd fixed = Eigen::VectorXd::Constant(1, 99.0);
  const DrawStore draws = run_reduced_gibbs(model, 0, fixed, 4000, 100, rng);
  const double n = static_cast<double>(draws.size());
  for (const auto& d : draws.draws) CHECK(d[0][0] == 99.0);
  for (int b : {1, 2}) {
    double mean = 0.0;
    for (const auto& d : draws.draws) mean += d[b][0];
    mean /= n;
    CHECK(std::abs(mean - means[b]) <= 4.0 * std::sqrt(vars[b] / n));
  }
}

TEST_CASE("reduced run means match the conjugate conditional algebra") {
  const auto toy = make_toy(3);
  RngStream rng(11);

  // Anchor the third block at an arbitrary fixed value.
  const double fixed_value = 0.4;
  const Eigen::VectorXd fixed = Eigen::VectorXd::Constant(1, fixed_value);
  const DrawStore draws = run_reduced_gibbs(toy, 2, fixed, 20000, 500, rng);
  const Eigen::Vector2d want = toy.conditional_mean_given(2, fixed_value);

  double m0 = 0.0, m1 = 0.0;
  for (const auto& d : draws.draws) {
    m0 += d[0][0];
    m1 += d[1][0];
  }
  m0 /= static_cast<double>(draws.size());
  m1 /= static_cast<double>(draws.size());
  // The free-block chain mixes slowly (only the sum is identified), so use
  // a generous Monte Carlo band.
  CHECK(m0 == doctest::Approx(want[0]).epsilon(0.15));
  CHECK(m1 == doctest::Approx(want[1]).epsilon(0.15));
}

TEST_CASE("chib estimate agrees with the analytic evidence on the toy") {
  const auto toy = make_toy(4);
  RngStream rng(13);
  const ChibResult res = chib_logml(toy, 6000, 6000, 500, rng);
  const double truth = toy.analytic_log_ml();
  CHECK(std::abs(res.estimate.log_ml - truth) <= 3.0 * res.estimate.se);
  CHECK(res.estimate.se > 0.0);
  CHECK(res.estimate.g1 == 6000);

  // Inverting the factorization at theta* reproduces the evidence exactly
  // when the posterior ordinate is evaluated in closed form.
  const double lik = res.estimate.components.log_lik;
  const double prior = res.estimate.components.log_prior;
  const double post_est = res.estimate.components.log_post_marginal +
                          res.estimate.components.log_post_reduced +
                          res.estimate.components.log_post_exact;
  CHECK(res.estimate.log_ml == doctest::Approx(lik + prior - post_est));
}

TEST_CASE("posterior-ordinate identity against the closed form") {
  const auto toy = make_toy(5);
  RngStream rng(17);
  const DrawStore draws = run_full_gibbs(toy, 4000, 400, rng);
  const BlockState star = select_theta_star(draws);
  const Eigen::Vector3d theta(star[0][0], star[1][0], star[2][0]);
  const double identity = toy.log_likelihood(star) + toy.log_prior(star) -
                          toy.log_posterior_density(theta);
  CHECK(identity == doctest::Approx(toy.analytic_log_ml()).epsilon(1e-10));
}

TEST_CASE("standard error shrinks roughly like one over root g") {
  const auto toy = make_toy(6);
  std::vector<double> log_g, log_se;
  for (long g : {500L, 2000L, 8000L}) {
    RngStream rng(1000 + g);
    const ChibResult res = chib_logml(toy, g, g, 100, rng);
    log_g.push_back(std::log(static_cast<double>(g)));
    log_se.push_back(std::log(res.estimate.se));
  }
  // Least-squares slope over the three budgets.
  const double mx = oracle::mean(log_g), my = oracle::mean(log_se);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < log_g.size(); ++i) {
    num += (log_g[i] - mx) * (log_se[i] - my);
    den += (log_g[i] - mx) * (log_g[i] - mx);
  }
  const double slope = num / den;
  CHECK(slope >= -0.65);
  CHECK(slope <= -0.35);
}

TEST_CASE("the two ordinate series are nearly independent") {
  const auto toy = make_toy(7);
  RngStream rng(19);
  const ChibResult res = chib_logml(toy, 10500, 10500, 500, rng);
  REQUIRE(res.h.h1.size() == 10000);
  REQUIRE(res.h.h2.size() == 10000);
  CHECK(std::abs(oracle::correlation(res.h.h1, res.h.h2)) < 0.05);
}

TEST_CASE("Newey-West at q = 0 is the sample covariance over g") {
  RngStream rng(23);
  std::vector<double> h1, h2;
  for (int i = 0; i < 500; ++i) {
    h1.push_back(std::exp(rng.normal(0.0, 0.3)));
    h2.push_back(std::exp(rng.normal(0.0, 0.2)));
  }
  const HSeries h = series_from(h1, h2);
  const Eigen::Matrix2d got = nw_variance(h, 0);

  const double g = 500.0;
  const double m1 = oracle::mean(h1), m2 = oracle::mean(h2);
  double v11 = 0.0, v22 = 0.0, v12 = 0.0;
  for (int i = 0; i < 500; ++i) {
    v11 += (h1[i] - m1) * (h1[i] - m1);
    v22 += (h2[i] - m2) * (h2[i] - m2);
    v12 += (h1[i] - m1) * (h2[i] - m2);
  }
  CHECK(got(0, 0) == doctest::Approx(v11 / g / g).epsilon(1e-12));
  CHECK(got(1, 1) == doctest::Approx(v22 / g / g).epsilon(1e-12));
  CHECK(got(0, 1) == doctest::Approx(v12 / g / g).epsilon(1e-12));
  CHECK(got(1, 0) == got(0, 1));
}

TEST_CASE("Newey-West on iid data stays near the iid variance") {
  RngStream rng(29);
  const int g = 10000;
  std::vector<double> h1, h2;
  for (int i = 0; i < g; ++i) {
    h1.push_back(1.0 + 0.1 * rng.normal());
    h2.push_back(2.0 + 0.2 * rng.normal());
  }
  const HSeries h = series_from(h1, h2);
  const Eigen::Matrix2d v10 = nw_variance(h, 10);
  const double iid1 = oracle::sample_sd(h1) * oracle::sample_sd(h1) / g;
  const double iid2 = oracle::sample_sd(h2) * oracle::sample_sd(h2) / g;
  CHECK(v10(0, 0) == doctest::Approx(iid1).epsilon(0.2));
  CHECK(v10(1, 1) == doctest::Approx(iid2).epsilon(0.2));

  // Bartlett weighting keeps the estimate positive semidefinite.
  for (int q : {0, 3, 10, 25}) {
    const Eigen::Matrix2d v = nw_variance(h, q);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(v);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-18);
  }

  CHECK_THROWS_AS(nw_variance(series_from({1.0, 2.0}, {1.0, 2.0}), 2),
                  NumericalError);
  CHECK_THROWS_AS(nw_variance(series_from({1.0}, {1.0, 2.0}), 0),
                  NumericalError);
}

TEST_CASE("lag selection: white noise, a strong VAR(3), and q_max = 0") {
  RngStream rng(31);
  const int g = 10000;
  {
    std::vector<double> h1, h2;
    for (int i = 0; i < g; ++i) {
      h1.push_back(5.0 + rng.normal());
      h2.push_back(5.0 + rng.normal());
    }
    const QSelection sel = select_q(series_from(h1, h2), 10);
    CHECK_FALSE(sel.fallback);
    CHECK(sel.q <= 2);
  }
  {
    // v_t = 0.1 v_{t-1} + 0.5 v_{t-3} + e_t, stationary with a strong third
    // lag; the offset keeps the series positive.
    std::vector<double> h1(g), h2(g);
    double a1 = 0, a2 = 0, a3 = 0, b1 = 0, b2 = 0, b3 = 0;
    for (int i = 0; i < g; ++i) {
      const double va = 0.1 * a1 + 0.5 * a3 + rng.normal();
      const double vb = 0.1 * b1 + 0.5 * b3 + rng.normal();
      a3 = a2; a2 = a1; a1 = va;
      b3 = b2; b2 = b1; b1 = vb;
      h1[i] = 20.0 + va;
      h2[i] = 20.0 + vb;
    }
    const QSelection sel = select_q(series_from(h1, h2), 8);
    CHECK_FALSE(sel.fallback);
    CHECK(sel.q == 3);
  }
  {
    std::vector<double> h1(100, 1.0), h2(100, 2.0);
    CHECK(select_q(series_from(h1, h2), 0).q == 0);
    // Constant series carry no dynamics at all.
    CHECK(select_q(series_from(h1, h2), 5).q == 0);
  }
}

TEST_CASE("delta-method standard error arithmetic") {
  CHECK(delta_method_se(Eigen::Matrix2d::Identity(),
                        Eigen::Vector2d(1.0, 1.0)) ==
        doctest::Approx(std::sqrt(2.0)));

  Eigen::Matrix2d diag = Eigen::Matrix2d::Zero();
  diag(0, 0) = 0.4;
  diag(1, 1) = 0.9;
  const Eigen::Vector2d h_bar(2.0, 3.0);
  CHECK(delta_method_se(diag, h_bar) ==
        doctest::Approx(std::sqrt(0.4 / 4.0 + 0.9 / 9.0)));

  // Scaling h by c and the variance by c^2 leaves the result unchanged.
  const double c = 7.3;
  CHECK(delta_method_se(c * c * diag, c * h_bar) ==
        doctest::Approx(delta_method_se(diag, h_bar)));

  CHECK_THROWS_AS(delta_method_se(diag, Eigen::Vector2d(0.0, 1.0)),
                  NumericalError);
}

TEST_CASE("block order must be a permutation") {
  BlockOrder bad;
  bad.marginal = 0;
  bad.reduced = 0;
  bad.exact = 2;
  CHECK_THROWS_AS(bad.validate(), NumericalError);
  BlockOrder ok{2, 0, 1};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("incremental estimator: lattice accounting and determinism") {
  const auto toy = make_toy(8);
  auto model = std::make_shared<ThreeBlockGaussianToy>(toy);

  IncrementalChibEstimator a(model, 500);
  IncrementalChibEstimator b(model, 500);
  RngStream rng_a(77), rng_b(77);

  auto cp_a = a.extend(3000, rng_a);
  auto cp_b = b.extend(3000, rng_b);
  CHECK(a.draws_used() == 3000);
  CHECK(cp_a.f_hat == cp_b.f_hat);
  CHECK(cp_a.se == cp_b.se);

  cp_a = a.extend(200, rng_a);
  cp_b = b.extend(200, rng_b);
  CHECK(a.draws_used() == 3200);
  CHECK(cp_a.f_hat == cp_b.f_hat);

  // The running estimate stays within a few standard errors of the truth.
  for (int i = 0; i < 10; ++i) cp_a = a.extend(200, rng_a);
  CHECK(std::abs(cp_a.f_hat - toy.analytic_log_ml()) <= 4.0 * cp_a.se);
}

TEST_CASE("incremental estimator rejects a first extension inside burn-in") {
  const auto toy = make_toy(9);
  auto model = std::make_shared<ThreeBlockGaussianToy>(toy);
  IncrementalChibEstimator est(model, 500);
  RngStream rng(3);
  CHECK_THROWS_AS(est.extend(400, rng), NumericalError);
}
