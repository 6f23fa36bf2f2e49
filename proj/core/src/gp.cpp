#include "boop/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "boop/stats.hpp"
#include "internal/nelder_mead.hpp"

namespace boop {

namespace {

constexpr double kSqrt5 = 2.23606797749978969;

void check_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite input");
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) {
    throw NumericalError("KernelSpec: sigma_f must be positive");
  }
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw NumericalError("KernelSpec: ell must be positive");
  }
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x_prime) {
  spec.validate();
  if (x.size() != x_prime.size()) {
    throw NumericalError("kernel_eval: dimension mismatch");
  }
  check_finite(x, "kernel_eval");
  check_finite(x_prime, "kernel_eval");

  const double r = (x - x_prime).norm();
  const double s2 = spec.sigma_f * spec.sigma_f;
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return s2 * std::exp(-0.5 * r * r / (spec.ell * spec.ell));
    case KernelFamily::Matern52: {
      const double t = kSqrt5 * r / spec.ell;
      return s2 * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  throw NumericalError("kernel_eval: unknown family");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<Eigen::VectorXd>& points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(spec, points[i], points[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

void TrainingSet::add(Eigen::VectorXd x, double y, double noise_var) {
  inputs.push_back(std::move(x));
  observations.push_back(y);
  noise_variances.push_back(noise_var);
}

void TrainingSet::validate() const {
  if (observations.size() != inputs.size() ||
      noise_variances.size() != inputs.size()) {
    throw NumericalError("TrainingSet: field lengths differ");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].allFinite() || !std::isfinite(observations[i])) {
      throw NumericalError("TrainingSet: non-finite entry at index " +
                           std::to_string(i));
    }
    if (!(noise_variances[i] >= 0.0)) {
      throw NumericalError("TrainingSet: negative noise variance at index " +
                           std::to_string(i));
    }
  }
}

GpSolve::GpSolve(TrainingSet train, const KernelSpec& spec, double prior_mean)
    : train_(std::move(train)), spec_(spec), prior_mean_(prior_mean) {
  train_.validate();
  spec.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(train_.size());
  if (n == 0) return;

  Eigen::MatrixXd k = gram_matrix(spec, train_.inputs);
  const double trace = k.trace();
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) += train_.noise_variances[i];

  const double base_jitter = 1e-10 * trace / static_cast<double>(n);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 7; ++attempt) {
    Eigen::MatrixXd kj = k;
    if (jitter > 0.0) kj.diagonal().array() += jitter;
    llt_.compute(kj);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      Eigen::VectorXd centered(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        centered[i] = train_.observations[i] - prior_mean_;
      }
      alpha_ = llt_.solve(centered);
      log_det_half_ = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        log_det_half_ += std::log(llt_.matrixL()(i, i));
      }
      return;
    }
    jitter = jitter == 0.0 ? base_jitter : 2.0 * jitter;
  }

  std::ostringstream msg;
  msg << "GpSolve: factorization failed after jitter " << jitter / 2.0
      << " (n=" << n << ", trace=" << trace
      << ", min diag=" << k.diagonal().minCoeff()
      << ", max diag=" << k.diagonal().maxCoeff() << ")";
  throw NumericalError(msg.str());
}

GpPosteriorPoint GpSolve::posterior_at(const Eigen::VectorXd& x_star) const {
  if (train_.empty()) {
    return {prior_mean_, spec_.sigma_f};
  }
  const Eigen::Index n = static_cast<Eigen::Index>(train_.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k_star[i] = kernel_eval(spec_, train_.inputs[i], x_star);
  }
  const double prior_var = kernel_eval(spec_, x_star, x_star);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  const double var = std::max(0.0, prior_var - v.squaredNorm());
  return {prior_mean_ + k_star.dot(alpha_), std::sqrt(var)};
}

double GpSolve::log_marginal_likelihood() const {
  const Eigen::Index n = static_cast<Eigen::Index>(train_.size());
  if (n == 0) return 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    quad += (train_.observations[i] - prior_mean_) * alpha_[i];
  }
  return -0.5 * quad - log_det_half_ - 0.5 * static_cast<double>(n) * kLogTwoPi;
}

GpPosteriorPoint gp_posterior(const TrainingSet& train, const KernelSpec& spec,
                              double prior_mean,
                              const Eigen::VectorXd& x_star) {
  return GpSolve(train, spec, prior_mean).posterior_at(x_star);
}

double gp_log_marginal_likelihood(const TrainingSet& train,
                                  const KernelSpec& spec, double prior_mean) {
  return GpSolve(train, spec, prior_mean).log_marginal_likelihood();
}

KernelFitResult gp_fit_hyperparams(const TrainingSet& train,
                                   KernelFamily family,
                                   const KernelFitBounds& bounds,
                                   RngStream& rng,
                                   const KernelFitOptions& options,
                                   double prior_mean) {
  train.validate();
  if (train.size() < 2) {
    throw NumericalError("gp_fit_hyperparams: need at least 2 points");
  }
  if (!(bounds.sigma_f_lo > 0.0) || !(bounds.ell_lo > 0.0) ||
      bounds.sigma_f_hi < bounds.sigma_f_lo || bounds.ell_hi < bounds.ell_lo) {
    throw NumericalError("gp_fit_hyperparams: invalid bounds");
  }

  // Search in log space; bounds may collapse either dimension to a point.
  Eigen::VectorXd lo(2), hi(2);
  lo << std::log(bounds.sigma_f_lo), std::log(bounds.ell_lo);
  hi << std::log(bounds.sigma_f_hi), std::log(bounds.ell_hi);

  auto objective = [&](const Eigen::VectorXd& p) -> double {
    KernelSpec spec{family, std::exp(p[0]), std::exp(p[1])};
    try {
      return gp_log_marginal_likelihood(train, spec, prior_mean);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const auto starts =
      internal::latin_hypercube(options.starts, 2, rng);

  KernelFitResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool any_moved = false;
  bool any_finite = false;
  for (const auto& s : starts) {
    const auto r = internal::nelder_mead_box(objective, lo, hi, s,
                                             options.max_iterations);
    any_moved = any_moved || r.moved;
    if (std::isfinite(r.value)) {
      any_finite = true;
      if (r.value > best.objective) {
        best.objective = r.value;
        best.spec = KernelSpec{family, std::exp(r.x[0]), std::exp(r.x[1])};
      }
    }
  }

  if (!any_finite) {
    // Every candidate failed to factorize; report the box midpoint.
    best.spec = KernelSpec{
        family, std::sqrt(bounds.sigma_f_lo * bounds.sigma_f_hi),
        std::sqrt(bounds.ell_lo * bounds.ell_hi)};
    best.objective = -std::numeric_limits<double>::infinity();
    best.converged = false;
    return best;
  }
  best.converged = any_moved || options.max_iterations == 0 ||
                   (lo - hi).isZero();
  return best;
}

InputScaler::InputScaler(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw NumericalError("InputScaler: bound dimensions differ");
  }
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (!(hi_[i] > lo_[i])) {
      throw NumericalError("InputScaler: degenerate bounds");
    }
  }
}

Eigen::VectorXd InputScaler::apply(const Eigen::VectorXd& x) const {
  if (identity()) return x;
  if (x.size() != lo_.size()) {
    throw NumericalError("InputScaler: dimension mismatch");
  }
  return (x - lo_).cwiseQuotient(hi_ - lo_);
}

GpModel::GpModel(KernelSpec spec, TrainingSet train, double prior_mean,
                 InputScaler scaler)
    : spec_(spec),
      prior_mean_(prior_mean),
      scaler_(std::move(scaler)),
      solve_(std::move(train), spec_, prior_mean_) {}

GpPosteriorPoint GpModel::posterior(const Eigen::VectorXd& x_raw) const {
  return solve_.posterior_at(scaler_.apply(x_raw));
}

GpModel GpModel::with_observation(const Eigen::VectorXd& x_raw, double y,
                                  double noise_var) const {
  TrainingSet extended = solve_.train();
  extended.add(scaler_.apply(x_raw), y, noise_var);
  return GpModel(spec_, std::move(extended), prior_mean_, scaler_);
}

}  // namespace boop
