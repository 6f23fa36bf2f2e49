#include "boop/effort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boop/stats.hpp"
#include "internal/nelder_mead.hpp"

namespace boop {

Eigen::VectorXd EffortCovariates::stacked() const {
  Eigen::VectorXd z(x.size() + 3);
  z.head(x.size()) = x;
  z[x.size()] = d;
  z[x.size() + 1] = s;
  z[x.size() + 2] = u;
  return z;
}

EffortCovariates build_covariates(const Eigen::VectorXd& x,
                                  const GpPosteriorPoint& surrogate_posterior,
                                  double f_max) {
  if (!std::isfinite(f_max)) {
    throw NumericalError("build_covariates: f_max must be finite");
  }
  EffortCovariates z;
  z.x = x;
  z.d = surrogate_posterior.mean - f_max;
  z.s = surrogate_posterior.sd;
  if (z.s > 0.0) {
    z.u = std::clamp(z.d / z.s, -kUCap, kUCap);
  } else {
    z.u = z.d > 0.0 ? kUCap : (z.d < 0.0 ? -kUCap : 0.0);
  }
  return z;
}

EffortModel EffortModel::fit(const std::vector<EffortRecord>& records,
                             const EffortFitOptions& options, RngStream& rng) {
  if (records.size() < 3) {
    throw ColdStartError("effort model needs at least 3 records");
  }
  const Eigen::Index dim = records.front().z.size();
  for (const auto& r : records) {
    if (r.z.size() != dim || !r.z.allFinite() || !std::isfinite(r.log_g)) {
      throw NumericalError("effort_fit: malformed record");
    }
  }

  EffortModel model;
  model.g_min_ = options.g_min;
  model.g_max_ = options.g_max;

  // z-score each covariate; constant dimensions keep unit scale.
  model.shift_ = Eigen::VectorXd::Zero(dim);
  model.scale_ = Eigen::VectorXd::Ones(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    double m = 0.0;
    for (const auto& r : records) m += r.z[j];
    m /= static_cast<double>(records.size());
    double v = 0.0;
    for (const auto& r : records) v += (r.z[j] - m) * (r.z[j] - m);
    v /= static_cast<double>(records.size());
    model.shift_[j] = m;
    if (v > 1e-24) model.scale_[j] = std::sqrt(v);
  }

  std::vector<double> responses;
  responses.reserve(records.size());
  for (const auto& r : records) responses.push_back(r.log_g);
  model.prior_mean_ = mean_of(responses);
  const double response_var =
      std::max(variance_of(responses), 1e-12);

  TrainingSet base;
  for (const auto& r : records) {
    base.add((r.z - model.shift_).cwiseQuotient(model.scale_), r.log_g, 0.0);
  }

  // Joint search over (sigma_f, ell, nugget) in log space.
  const double sd = std::sqrt(response_var);
  Eigen::VectorXd lo(3), hi(3);
  lo << std::log(sd * 1e-3), std::log(0.05), std::log(response_var * 1e-8);
  hi << std::log(sd * 1e3), std::log(20.0), std::log(response_var * 10.0 + 1e-8);

  auto objective = [&](const Eigen::VectorXd& p) -> double {
    KernelSpec spec{KernelFamily::Matern52, std::exp(p[0]), std::exp(p[1])};
    const double nugget = std::exp(p[2]);
    TrainingSet t = base;
    std::fill(t.noise_variances.begin(), t.noise_variances.end(), nugget);
    try {
      return gp_log_marginal_likelihood(t, spec, model.prior_mean_);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const auto starts = internal::latin_hypercube(options.starts, 3, rng);
  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p = (lo + hi) / 2.0;
  for (const auto& s : starts) {
    const auto r =
        internal::nelder_mead_box(objective, lo, hi, s, options.max_iterations);
    if (std::isfinite(r.value) && r.value > best_value) {
      best_value = r.value;
      best_p = r.x;  // log-space parameters
    }
  }

  model.spec_ = KernelSpec{KernelFamily::Matern52, std::exp(best_p[0]),
                           std::exp(best_p[1])};
  model.nugget_ = std::exp(best_p[2]);
  std::fill(base.noise_variances.begin(), base.noise_variances.end(),
            model.nugget_);
  model.solve_.emplace(std::move(base), model.spec_, model.prior_mean_);
  return model;
}

double EffortModel::posterior_log_mean(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd zs = (z - shift_).cwiseQuotient(scale_);
  return solve_->posterior_at(zs).mean;
}

double EffortModel::predict_draws(const Eigen::VectorXd& z) const {
  return std::clamp(std::exp(posterior_log_mean(z)), g_min_, g_max_);
}

double EffortModel::predict_draws(const EffortCovariates& z) const {
  return predict_draws(z.stacked());
}

EffortModel effort_fit(const std::vector<EffortRecord>& records,
                       const EffortFitOptions& options, RngStream& rng) {
  return EffortModel::fit(records, options, rng);
}

double effort_predict(const EffortModel& model, const EffortCovariates& z) {
  return model.predict_draws(z);
}

}  // namespace boop
