#include "boop/bench.hpp"

#include <doctest.h>

#include <cmath>

#include "boop/rng.hpp"
#include "support/oracles.hpp"

using namespace boop;

TEST_CASE("simulated estimator error scale matches the iid theory") {
  const double noise_sd = 2.0;
  const long g = 10000;
  SyntheticObjective obj;
  obj.true_function = [](const Eigen::VectorXd&) { return 1.5; };
  obj.noise_sd_at_unit_g = noise_sd;
  obj.iact_profile = [](const Eigen::VectorXd&) { return 1.0; };

  std::vector<double> errors;
  double reported_se = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream rng(seed);
    auto est = simulated_mcmc_estimator(obj, Eigen::VectorXd::Zero(2));
    const auto cp = est->extend(g, rng);
    errors.push_back(cp.f_hat - 1.5);
    reported_se = cp.se;
  }
  const double want = noise_sd / std::sqrt(static_cast<double>(g));
  CHECK(reported_se == doctest::Approx(want));
  CHECK(oracle::sample_sd(errors) == doctest::Approx(want).epsilon(0.25));
}

TEST_CASE("zero noise reproduces the true value at every checkpoint") {
  SyntheticObjective obj;
  obj.true_function = [](const Eigen::VectorXd& x) { return 3.0 * x[0]; };
  obj.noise_sd_at_unit_g = 0.0;
  RngStream rng(1);
  auto est = simulated_mcmc_estimator(obj, Eigen::VectorXd::Constant(1, 0.5));
  for (long step : {1L, 10L, 100L}) {
    const auto cp = est->extend(step, rng);
    CHECK(cp.f_hat == doctest::Approx(1.5));
    CHECK(cp.se == doctest::Approx(0.0));
  }
}

TEST_CASE("autocorrelation inflates the variance by (1+rho)/(1-rho)") {
  // rho = 0.5 corresponds to an integrated autocorrelation time of 3.
  const double noise_sd = 1.0, iact = 3.0;
  const long g = 2000;
  std::vector<double> means;
  double reported_se = 0.0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RngStream rng(seed);
    SimulatedMcmcEstimator est(0.0, noise_sd, iact);
    const auto cp = est.extend(g, rng);
    means.push_back(cp.f_hat);
    reported_se = cp.se;
  }
  const double iid_var = noise_sd * noise_sd / static_cast<double>(g);
  CHECK(reported_se * reported_se == doctest::Approx(3.0 * iid_var));
  const double empirical_var =
      oracle::sample_sd(means) * oracle::sample_sd(means);
  CHECK(empirical_var / iid_var == doctest::Approx(3.0).epsilon(0.3));
}

TEST_CASE("the estimator is unbiased at every checkpoint") {
  SyntheticObjective obj = standard_bench_objective(2.0);
  const Eigen::Vector2d x(0.6, 0.4);
  const double truth = obj.true_function(x);
  for (long g : {50L, 400L}) {
    std::vector<double> estimates;
    std::vector<double> ses;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      RngStream rng(1000 + seed);
      auto est = simulated_mcmc_estimator(obj, x);
      const auto cp = est->extend(g, rng);
      estimates.push_back(cp.f_hat);
      ses.push_back(cp.se);
    }
    double pooled = 0.0;
    for (double se : ses) pooled += se * se;
    pooled = std::sqrt(pooled) / static_cast<double>(ses.size());
    CHECK(std::abs(oracle::mean(estimates) - truth) <= 3.0 * pooled);
  }
}

TEST_CASE("stock surface: maximum location and bounds") {
  const auto [x_opt, f_opt] = standard_bench_optimum();
  CHECK(x_opt[0] == doctest::Approx(0.8).epsilon(0.05));
  CHECK(x_opt[1] == doctest::Approx(0.3).epsilon(0.05));
  const SyntheticObjective obj = standard_bench_objective();
  RngStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d x(rng.uniform(), rng.uniform());
    CHECK(obj.true_function(x) <= f_opt + 1e-9);
  }
  const Box bounds = standard_bench_bounds();
  CHECK(bounds.dim() == 2);
}

TEST_CASE("strategy comparison: curve shape and reproducibility") {
  const SyntheticObjective obj = standard_bench_objective(2.0);
  BoopConfig cfg;
  cfg.bounds = standard_bench_bounds();
  cfg.g_min = 100;
  cfg.batch = 100;
  cfg.g_max = 400;
  cfg.iterations = 8;
  cfg.j0 = 2;
  cfg.fit_starts = 4;
  cfg.fit_iterations = 50;
  cfg.acquisition_restarts = 3;

  const CompareReport report =
      compare_strategies(obj, cfg, {"boop"}, {5}, 0.9);
  REQUIRE(report.runs.size() == 1);
  const StrategyRun& run = report.runs.front();
  REQUIRE(run.points.size() == 8);
  double prev = -1e300;
  for (const auto& p : run.points) {
    CHECK(p.incumbent >= prev);
    prev = p.incumbent;
  }

  const CompareReport again =
      compare_strategies(obj, cfg, {"boop"}, {5}, 0.9);
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    CHECK(again.runs.front().points[i].incumbent == run.points[i].incumbent);
    CHECK(again.runs.front().points[i].cum_draws == run.points[i].cum_draws);
  }

  const CompareReport both =
      compare_strategies(obj, cfg, {"boop", "bo-ei"}, {1, 2}, 0.9);
  CHECK(both.runs.size() == 4);
  for (const auto& r : both.runs) {
    if (r.strategy == "bo-ei") {
      CHECK(r.total_draws == cfg.iterations * cfg.g_max);
    } else {
      CHECK(r.total_draws <= cfg.iterations * cfg.g_max);
    }
  }
}
