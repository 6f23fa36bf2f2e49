#pragma once

#include <Eigen/Dense>
#include <vector>

#include "boop/errors.hpp"
#include "boop/rng.hpp"

namespace boop {

enum class KernelFamily { SquaredExponential, Matern52 };

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  double sigma_f = 1.0;  // function-scale standard deviation
  double ell = 1.0;      // length scale (isotropic)

  void validate() const;
};

// Covariance between f(x) and f(x'). Symmetric; equals sigma_f^2 at r = 0.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x_prime);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<Eigen::VectorXd>& points);

// Observations with per-point noise variances (heteroscedastic).
struct TrainingSet {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> observations;
  std::vector<double> noise_variances;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  void add(Eigen::VectorXd x, double y, double noise_var);
  void validate() const;
};

struct GpPosteriorPoint {
  double mean = 0.0;
  double sd = 0.0;
};

// Cholesky factorization of K + diag(noise) shared across posterior queries.
// A diagonal jitter ladder (1e-10 * trace(K)/n, doubled up to six times) is
// engaged only if the plain factorization fails.
class GpSolve {
public:
  GpSolve(TrainingSet train, const KernelSpec& spec, double prior_mean);

  GpPosteriorPoint posterior_at(const Eigen::VectorXd& x_star) const;
  double log_marginal_likelihood() const;
  double jitter_used() const { return jitter_; }
  const TrainingSet& train() const { return train_; }

private:
  TrainingSet train_;
  KernelSpec spec_;
  double prior_mean_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (K + D)^{-1} (y - prior_mean)
  double log_det_half_ = 0.0;
};

// Exact Gaussian conditional of f(x*) given the observations. An empty
// training set returns the prior (prior_mean, sigma_f).
GpPosteriorPoint gp_posterior(const TrainingSet& train, const KernelSpec& spec,
                              double prior_mean, const Eigen::VectorXd& x_star);

// Log density of the observations under the GP-plus-noise joint Gaussian.
double gp_log_marginal_likelihood(const TrainingSet& train,
                                  const KernelSpec& spec, double prior_mean);

struct KernelFitBounds {
  double sigma_f_lo = 1e-3;
  double sigma_f_hi = 1e3;
  double ell_lo = 1e-2;
  double ell_hi = 1e2;
};

struct KernelFitResult {
  KernelSpec spec;
  double objective = 0.0;  // log marginal likelihood at the returned spec
  bool converged = true;   // false when every start failed to move
};

struct KernelFitOptions {
  int starts = 8;
  int max_iterations = 150;  // Nelder-Mead iterations per start
};

// Maximizes the GP log marginal likelihood over (sigma_f, ell) with a
// log-space Latin hypercube multistart and Nelder-Mead ascent. Deterministic
// given the stream; ties broken toward the earliest start.
KernelFitResult gp_fit_hyperparams(const TrainingSet& train,
                                   KernelFamily family,
                                   const KernelFitBounds& bounds,
                                   RngStream& rng,
                                   const KernelFitOptions& options = {},
                                   double prior_mean = 0.0);

// Maps raw inputs onto [0, 1]^d using box bounds. Default-constructed scaler
// is the identity.
class InputScaler {
public:
  InputScaler() = default;
  InputScaler(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  bool identity() const { return lo_.size() == 0; }

private:
  Eigen::VectorXd lo_, hi_;
};

// Immutable fitted surrogate: kernel + data + constant prior mean.
// The training set must already be in scaler coordinates; posterior() and
// with_observation() take raw inputs and scale them internally.
// with_observation returns a new model; the original is never mutated.
class GpModel {
public:
  GpModel(KernelSpec spec, TrainingSet train, double prior_mean,
          InputScaler scaler = {});

  GpPosteriorPoint posterior(const Eigen::VectorXd& x_raw) const;
  GpModel with_observation(const Eigen::VectorXd& x_raw, double y,
                           double noise_var) const;

  const KernelSpec& spec() const { return spec_; }
  const TrainingSet& train() const { return solve_.train(); }
  double prior_mean() const { return prior_mean_; }
  const InputScaler& scaler() const { return scaler_; }

private:
  KernelSpec spec_;
  double prior_mean_;
  InputScaler scaler_;
  GpSolve solve_;  // owns the (scaled) training data
};

}  // namespace boop
