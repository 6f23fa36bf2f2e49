#include "boop/effort.hpp"

#include <doctest.h>

#include <cmath>

#include "boop/rng.hpp"

using namespace boop;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("covariates collect (x, d, s, u) with the s-floor rule") {
  const Eigen::VectorXd x = vec1(0.3);

  EffortCovariates z = build_covariates(x, {1.0, 0.5}, 1.0);
  CHECK(z.d == doctest::Approx(0.0));
  CHECK(z.u == doctest::Approx(0.0));

  z = build_covariates(x, {3.0, 1.0}, 1.0);
  CHECK(z.d == doctest::Approx(2.0));
  CHECK(z.s == doctest::Approx(1.0));
  CHECK(z.u == doctest::Approx(2.0));

  z = build_covariates(x, {3.0, 0.0}, 1.0);
  CHECK(z.u == doctest::Approx(kUCap));
  z = build_covariates(x, {-3.0, 0.0}, 1.0);
  CHECK(z.u == doctest::Approx(-kUCap));
  z = build_covariates(x, {1.0, 0.0}, 1.0);
  CHECK(z.u == doctest::Approx(0.0));

  // Extreme-but-finite ratios are capped too.
  z = build_covariates(x, {1.0 + 1e3, 1e-9}, 1.0);
  CHECK(z.u == doctest::Approx(kUCap));

  const Eigen::VectorXd stacked = z.stacked();
  CHECK(stacked.size() == 4);
  CHECK(stacked[0] == doctest::Approx(0.3));

  CHECK_THROWS_AS(
      build_covariates(x, {1.0, 1.0},
                       std::numeric_limits<double>::infinity()),
      NumericalError);
}

TEST_CASE("too few records signals a cold start") {
  RngStream rng(1);
  std::vector<EffortRecord> records;
  records.push_back({vec1(0.0), 8.0});
  records.push_back({vec1(1.0), 8.1});
  CHECK_THROWS_AS(effort_fit(records, {}, rng), ColdStartError);
}

TEST_CASE("constant responses predict the constant everywhere") {
  RngStream rng(2);
  std::vector<EffortRecord> records;
  for (int i = 0; i < 5; ++i) {
    records.push_back({vec1(0.2 * i), std::log(4000.0)});
  }
  EffortFitOptions options;
  options.g_min = 1.0;
  options.g_max = 1e9;
  const EffortModel model = effort_fit(records, options, rng);
  CHECK(model.nugget_variance() >= 0.0);
  for (double t : {-0.5, 0.0, 0.4, 1.3}) {
    CHECK(model.predict_draws(vec1(t)) == doctest::Approx(4000.0).epsilon(1e-6));
  }
}

TEST_CASE("noiseless linear effort surface is recovered") {
  RngStream rng(3);
  std::vector<EffortRecord> records;
  for (int i = 0; i < 20; ++i) {
    const double z = -1.0 + 2.0 * i / 19.0;
    records.push_back({vec1(z), 8.0 + z});
  }
  EffortFitOptions options;
  options.g_min = 1.0;
  options.g_max = 1e9;
  const EffortModel model = effort_fit(records, options, rng);
  for (double held_out : {-0.73, -0.21, 0.34, 0.77}) {
    const double predicted = model.posterior_log_mean(vec1(held_out));
    CHECK(std::abs(predicted - (8.0 + held_out)) < 0.1);
  }
}

TEST_CASE("predictions clamp to the feasible draw range") {
  RngStream rng(4);
  std::vector<EffortRecord> records;
  records.push_back({vec1(0.0), std::log(100.0)});
  records.push_back({vec1(0.5), std::log(120.0)});
  records.push_back({vec1(1.0), std::log(90.0)});
  EffortFitOptions options;
  options.g_min = 3000.0;
  options.g_max = 10000.0;
  const EffortModel model = effort_fit(records, options, rng);
  // All responses sit far below the floor, so the clamp binds.
  CHECK(model.predict_draws(vec1(0.25)) == doctest::Approx(3000.0));

  std::vector<EffortRecord> high;
  high.push_back({vec1(0.0), std::log(9e7)});
  high.push_back({vec1(0.5), std::log(1.1e8)});
  high.push_back({vec1(1.0), std::log(9.5e7)});
  const EffortModel model_high = effort_fit(high, options, rng);
  CHECK(model_high.predict_draws(vec1(0.5)) == doctest::Approx(10000.0));
}

TEST_CASE("round trip through exp(log G) at a matched record") {
  RngStream rng(5);
  std::vector<EffortRecord> records;
  records.push_back({vec1(0.0), std::log(3000.0)});
  records.push_back({vec1(0.5), std::log(5000.0)});
  records.push_back({vec1(1.0), std::log(9000.0)});
  EffortFitOptions options;
  options.g_min = 1.0;
  options.g_max = 1e9;
  const EffortModel model = effort_fit(records, options, rng);
  // Posterior mean of a noiseless-ish GP at a training point stays close to
  // the observed response; the prediction is its exponential.
  const double predicted = model.predict_draws(vec1(0.5));
  CHECK(predicted == doctest::Approx(5000.0).epsilon(0.05));
}
