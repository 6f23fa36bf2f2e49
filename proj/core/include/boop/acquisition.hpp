#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "boop/effort.hpp"
#include "boop/gp.hpp"
#include "boop/rng.hpp"

namespace boop {

struct Box {
  Eigen::VectorXd lo, hi;

  Eigen::Index dim() const { return lo.size(); }
  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;
};

// Phi((m - f_max) / s). Requires s > 0; the deterministic limit is the
// caller's responsibility.
double prob_improvement(double m, double s, double f_max);

// E[max(f - f_max, 0)] under N(m, s^2); max(m - f_max, 0) at s = 0.
// Switches to a tail expansion when (m - f_max)/s < -8 to avoid underflow.
double expected_improvement(double m, double s, double f_max);

struct AcquisitionContext {
  const GpModel* surrogate = nullptr;
  const EffortModel* effort = nullptr;  // null before the model is trainable
  double f_max = 0.0;
  double g_min = 1.0;   // clamp floor for predicted draws
  double g_max = 1.0;   // clamp ceiling
  bool cold_start_flagged = false;  // set when the fallback divisor was used
};

// EI divided by the predicted draws-to-stopping at x, clamped to
// [g_min, g_max]. Falls back to EI / g_min while the effort model is cold.
double boop_acquisition(const Eigen::VectorXd& x, AcquisitionContext& ctx);

// EI divided by a fixed duration model c(x) > 0.
double eis_acquisition(const Eigen::VectorXd& x, const AcquisitionContext& ctx,
                       const std::function<double(const Eigen::VectorXd&)>&
                           duration_model);

struct AcquisitionOptimizerOptions {
  int uniform_seeds = 32;
  int refine_sweeps = 3;
  int golden_iterations = 40;
};

// Multistart maximization: uniform seeds plus any extra seeds, followed by
// coordinate-wise golden-section refinement of the best `restarts` seeds.
// Throws when the function is non-finite at every candidate.
Eigen::VectorXd optimize_acquisition(
    const std::function<double(const Eigen::VectorXd&)>& acq, const Box& bounds,
    int restarts, RngStream& rng,
    const std::vector<Eigen::VectorXd>& extra_seeds = {},
    const AcquisitionOptimizerOptions& options = {});

}  // namespace boop
