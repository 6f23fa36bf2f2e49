#pragma once

#include <Eigen/Dense>

#include "boop/gp.hpp"
#include "boop/rng.hpp"

namespace boop {

// A simulation-backed estimate whose precision grows with the draws spent.
// extend() consumes additional draws and reports the running estimate with
// its standard error; draws_used() is the cumulative count (burn-in
// included, so it matches raw iteration accounting).
class PrecisionEstimator {
public:
  struct Checkpoint {
    double f_hat = 0.0;
    double se = 0.0;
  };

  virtual ~PrecisionEstimator() = default;
  virtual Checkpoint extend(long draws, RngStream& rng) = 0;
  virtual long draws_used() const = 0;
};

struct EarlyStopConfig {
  double alpha = 1e-3;  // stop once P(improvement) drops below this
  long g_min = 3000;
  long batch = 200;
  long g_max = 10000;

  void validate() const;
};

struct EvaluationOutcome {
  Eigen::VectorXd x;
  double f_hat = 0.0;
  double se = 0.0;
  long g_used = 0;
  bool stopped_early = false;
  double pi_at_stop = 1.0;
};

// Runs the estimator to g_min, then in batches; after each batch the
// surrogate is conditioned on the running (f_hat, se^2) at x and the
// evaluation stops once the probability of improving on f_max falls below
// alpha, or the draw cap is reached. The shared surrogate is never mutated.
EvaluationOutcome evaluate_with_early_stopping(PrecisionEstimator& estimator,
                                               const Eigen::VectorXd& x,
                                               const GpModel& surrogate,
                                               double f_max,
                                               const EarlyStopConfig& cfg,
                                               RngStream& rng);

}  // namespace boop
