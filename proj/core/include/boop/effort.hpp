#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "boop/gp.hpp"

namespace boop {

// |u| is capped here when the surrogate sd is zero; any large finite value
// carries the same "hopeless vs promising" signal.
inline constexpr double kUCap = 50.0;

// One completed evaluation: covariates at selection time and the log of the
// draws it ended up consuming.
struct EffortRecord {
  Eigen::VectorXd z;
  double log_g = 0.0;
};

// Covariates (x, d, s, u) with d = m(x) - f_max and u = d / s.
struct EffortCovariates {
  Eigen::VectorXd x;
  double d = 0.0;
  double s = 0.0;
  double u = 0.0;

  Eigen::VectorXd stacked() const;
};

EffortCovariates build_covariates(const Eigen::VectorXd& x,
                                  const GpPosteriorPoint& surrogate_posterior,
                                  double f_max);

struct EffortFitOptions {
  double g_min = 3000.0;  // prediction clamp floor
  double g_max = 10000.0; // prediction clamp ceiling
  int starts = 8;
  int max_iterations = 120;
};

// GP regression on log draw counts with a homoscedastic nugget fitted
// jointly with the kernel hyperparameters. Covariates are z-scored with
// moments taken over the records.
class EffortModel {
public:
  static EffortModel fit(const std::vector<EffortRecord>& records,
                         const EffortFitOptions& options, RngStream& rng);

  // exp of the posterior mean of log G (a log-normal median), clamped to
  // [g_min, g_max].
  double predict_draws(const Eigen::VectorXd& z) const;
  double predict_draws(const EffortCovariates& z) const;

  double posterior_log_mean(const Eigen::VectorXd& z) const;
  double nugget_variance() const { return nugget_; }
  const KernelSpec& kernel() const { return spec_; }
  double clamp_floor() const { return g_min_; }
  double clamp_ceiling() const { return g_max_; }

private:
  EffortModel() = default;

  KernelSpec spec_;
  double nugget_ = 0.0;
  double prior_mean_ = 0.0;
  Eigen::VectorXd shift_, scale_;
  std::optional<GpSolve> solve_;  // over standardized covariates
  double g_min_ = 0.0, g_max_ = 0.0;
};

EffortModel effort_fit(const std::vector<EffortRecord>& records,
                       const EffortFitOptions& options, RngStream& rng);
double effort_predict(const EffortModel& model, const EffortCovariates& z);

}  // namespace boop
