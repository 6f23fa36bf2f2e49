#include "boop/evaluator.hpp"

#include <cmath>
#include <sstream>

#include "boop/stats.hpp"

namespace boop {

void EarlyStopConfig::validate() const {
  if (!(alpha >= 0.0) || !(alpha < 1.0)) {
    throw NumericalError("EarlyStopConfig: alpha must be in [0, 1)");
  }
  if (g_min < 1 || batch < 1 || g_max < g_min) {
    throw NumericalError("EarlyStopConfig: require g_min >= 1, batch >= 1, "
                         "g_max >= g_min");
  }
}

namespace {

double checkpoint_pi(const GpModel& surrogate, const Eigen::VectorXd& x,
                     double f_hat, double se, double f_max) {
  const GpModel provisional =
      surrogate.with_observation(x, f_hat, se * se);
  const GpPosteriorPoint post = provisional.posterior(x);
  if (post.sd > 0.0) {
    return normal_cdf((post.mean - f_max) / post.sd);
  }
  // Deterministic limit of Phi((m - f_max)/s) as s -> 0.
  if (post.mean > f_max) return 1.0;
  if (post.mean < f_max) return 0.0;
  return 0.5;
}

}  // namespace

EvaluationOutcome evaluate_with_early_stopping(PrecisionEstimator& estimator,
                                               const Eigen::VectorXd& x,
                                               const GpModel& surrogate,
                                               double f_max,
                                               const EarlyStopConfig& cfg,
                                               RngStream& rng) {
  cfg.validate();

  EvaluationOutcome out;
  out.x = x;

  PrecisionEstimator::Checkpoint cp;
  try {
    cp = estimator.extend(cfg.g_min, rng);
    for (;;) {
      out.f_hat = cp.f_hat;
      out.se = cp.se;
      out.g_used = estimator.draws_used();
      out.pi_at_stop = checkpoint_pi(surrogate, x, cp.f_hat, cp.se, f_max);
      if (out.pi_at_stop < cfg.alpha) {
        out.stopped_early = true;
        break;
      }
      if (out.g_used >= cfg.g_max) {
        out.stopped_early = false;
        break;
      }
      const long step = std::min(cfg.batch, cfg.g_max - out.g_used);
      cp = estimator.extend(step, rng);
    }
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "evaluation failed after " << estimator.draws_used()
        << " draws: " << e.what();
    throw NumericalError(msg.str());
  }
  return out;
}

}  // namespace boop
