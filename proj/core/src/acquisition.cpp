#include "boop/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boop/stats.hpp"

namespace boop {

void Box::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw NumericalError("Box: bad bound dimensions");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw NumericalError("Box: degenerate or non-finite bounds");
    }
  }
}

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

double prob_improvement(double m, double s, double f_max) {
  if (!(s > 0.0)) {
    throw NumericalError("prob_improvement: s must be positive");
  }
  if (!std::isfinite(m) || !std::isfinite(f_max)) {
    throw NumericalError("prob_improvement: non-finite input");
  }
  return normal_cdf((m - f_max) / s);
}

double expected_improvement(double m, double s, double f_max) {
  if (!std::isfinite(m) || !std::isfinite(s) || !std::isfinite(f_max)) {
    throw NumericalError("expected_improvement: non-finite input");
  }
  if (s < 0.0) {
    throw NumericalError("expected_improvement: negative s");
  }
  if (s == 0.0) {
    return std::max(m - f_max, 0.0);
  }
  const double z = (m - f_max) / s;
  return std::max(0.0, s * ei_kernel(z));
}

double boop_acquisition(const Eigen::VectorXd& x, AcquisitionContext& ctx) {
  const GpPosteriorPoint post = ctx.surrogate->posterior(x);
  const double ei = expected_improvement(post.mean, post.sd, ctx.f_max);
  if (ctx.effort == nullptr) {
    ctx.cold_start_flagged = true;
    return ei / ctx.g_min;
  }
  const EffortCovariates z = build_covariates(x, post, ctx.f_max);
  const double g_hat =
      std::clamp(ctx.effort->predict_draws(z), ctx.g_min, ctx.g_max);
  return ei / g_hat;
}

double eis_acquisition(const Eigen::VectorXd& x, const AcquisitionContext& ctx,
                       const std::function<double(const Eigen::VectorXd&)>&
                           duration_model) {
  const GpPosteriorPoint post = ctx.surrogate->posterior(x);
  const double ei = expected_improvement(post.mean, post.sd, ctx.f_max);
  const double c = duration_model(x);
  if (!(c > 0.0)) {
    throw NumericalError("eis_acquisition: duration must be positive");
  }
  return ei / c;
}

namespace {

// Golden-section line maximization along one coordinate.
double golden_refine(const std::function<double(const Eigen::VectorXd&)>& f,
                     Eigen::VectorXd& x, Eigen::Index dim, double lo, double hi,
                     int iterations, double& best_value) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  auto eval_at = [&](double t) {
    Eigen::VectorXd xt = x;
    xt[dim] = t;
    const double v = f(xt);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  double fc = eval_at(c);
  double fd = eval_at(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval_at(d);
    }
  }
  const double t = fc > fd ? c : d;
  const double ft = fc > fd ? fc : fd;
  if (ft > best_value) {
    best_value = ft;
    x[dim] = t;
    return ft;
  }
  return best_value;
}

}  // namespace

Eigen::VectorXd optimize_acquisition(
    const std::function<double(const Eigen::VectorXd&)>& acq, const Box& bounds,
    int restarts, RngStream& rng,
    const std::vector<Eigen::VectorXd>& extra_seeds,
    const AcquisitionOptimizerOptions& options) {
  bounds.validate();
  if (restarts < 1) {
    throw NumericalError("optimize_acquisition: restarts must be >= 1");
  }
  const Eigen::Index d = bounds.dim();

  struct Candidate {
    Eigen::VectorXd x;
    double value;
  };
  std::vector<Candidate> seeds;
  for (int i = 0; i < options.uniform_seeds; ++i) {
    Eigen::VectorXd x(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x[j] = rng.uniform(bounds.lo[j], bounds.hi[j]);
    }
    seeds.push_back({std::move(x), 0.0});
  }
  for (const auto& s : extra_seeds) {
    if (s.size() == d && bounds.contains(s)) seeds.push_back({s, 0.0});
  }

  bool any_finite = false;
  for (auto& s : seeds) {
    const double v = acq(s.x);
    s.value = std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    any_finite = any_finite || std::isfinite(v);
  }
  if (!any_finite) {
    throw NumericalError(
        "optimize_acquisition: objective non-finite at every seed");
  }

  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.value > b.value;
                   });

  Candidate best = seeds.front();
  const int to_refine = std::min<int>(restarts, static_cast<int>(seeds.size()));
  for (int i = 0; i < to_refine; ++i) {
    Eigen::VectorXd x = seeds[i].x;
    double value = seeds[i].value;
    for (int sweep = 0; sweep < options.refine_sweeps; ++sweep) {
      for (Eigen::Index dim = 0; dim < d; ++dim) {
        value = golden_refine(acq, x, dim, bounds.lo[dim], bounds.hi[dim],
                              options.golden_iterations, value);
      }
    }
    if (value > best.value) {
      best = {x, value};
    }
  }
  return best.x;
}

}  // namespace boop
