#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "boop/driver.hpp"
#include "boop/evaluator.hpp"

namespace boop {

// Closed-form objective with a simulated-chain noise model. noise_sd_at_unit_g
// is the marginal standard deviation of a single chain draw; the integrated
// autocorrelation time profile inflates the variance of the running mean.
struct SyntheticObjective {
  std::function<double(const Eigen::VectorXd&)> true_function;
  double noise_sd_at_unit_g = 1.0;
  std::function<double(const Eigen::VectorXd&)> iact_profile =
      [](const Eigen::VectorXd&) { return 1.0; };
};

// Stationary AR(1) chain around the true value; the reported standard error
// is the exact asymptotic one, noise_sd * sqrt(iact / G).
class SimulatedMcmcEstimator : public PrecisionEstimator {
public:
  SimulatedMcmcEstimator(double true_value, double noise_sd, double iact);

  Checkpoint extend(long draws, RngStream& rng) override;
  long draws_used() const override { return draws_; }

private:
  double true_value_;
  double noise_sd_;
  double rho_;       // (iact - 1) / (iact + 1)
  double iact_;
  double state_ = 0.0;
  double sum_ = 0.0;
  long draws_ = 0;
};

std::unique_ptr<PrecisionEstimator> simulated_mcmc_estimator(
    const SyntheticObjective& objective, const Eigen::VectorXd& x);

// The stock comparison surface: two Gaussian bumps of different height plus
// a low ridge that is flat along the second coordinate,
//   f(x) = 2.0 exp(-8 |x - (0.8, 0.3)|^2)
//        + 1.4 exp(-10 |x - (0.2, 0.7)|^2)
//        + 0.3 exp(-20 (x1 - 0.5)^2)
// on the unit square, with the draw-cost profile rising in x1.
SyntheticObjective standard_bench_objective(double noise_sd = 3.0);
Box standard_bench_bounds();

// Location and value of the global maximum, found by a fine grid plus local
// refinement; deterministic.
std::pair<Eigen::VectorXd, double> standard_bench_optimum();

struct StrategyCurvePoint {
  int iter = 0;
  long cum_draws = 0;
  double incumbent = 0.0;
};

struct StrategyRun {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<StrategyCurvePoint> points;
  double f_start = 0.0;          // incumbent after initialization
  double final_incumbent = 0.0;
  long total_draws = 0;
  long draws_to_target = 0;      // total draws if the target was never hit
  bool reached_target = false;
};

struct CompareReport {
  std::vector<StrategyRun> runs;
  double true_max = 0.0;
  double gap_fraction = 0.0;
};

// Runs each strategy on each seed and reports incumbent-versus-cost curves
// together with the draws needed to close `gap_fraction` of the gap between
// the post-initialization incumbent and the true maximum.
CompareReport compare_strategies(const SyntheticObjective& objective,
                                 const BoopConfig& cfg,
                                 const std::vector<std::string>& strategies,
                                 const std::vector<std::uint64_t>& seeds,
                                 double gap_fraction = 0.9);

void write_compare_curves_csv(std::ostream& out, const CompareReport& report);
void write_compare_summary_csv(std::ostream& out, const CompareReport& report);

}  // namespace boop
