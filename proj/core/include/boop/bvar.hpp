#pragma once

#include <Eigen/Dense>
#include <memory>

#include "boop/chib.hpp"
#include "boop/evaluator.hpp"
#include "boop/rng.hpp"

namespace boop {

// Observations plus deterministic regressors (default: an intercept column).
struct BvarData {
  Eigen::MatrixXd y;  // T x n
  Eigen::MatrixXd x;  // T x m deterministic regressors
  int lags = 1;

  int n() const { return static_cast<int>(y.cols()); }
  int m() const { return static_cast<int>(x.cols()); }
  int t() const { return static_cast<int>(y.rows()); }

  // lags == 0 is admitted for the conjugate oracle's regression-only form;
  // the steady-state model itself requires lags >= 1.
  void validate() const;

  static BvarData with_intercept(Eigen::MatrixXd y, int lags);
};

struct ShrinkageParams {
  double lambda1 = 0.1;  // overall shrinkage
  double lambda2 = 0.5;  // cross-lag shrinkage
  double lambda3 = 1.0;  // lag decay

  void validate() const;
};

// Which own-lag variance convention to use. LagDecayOnly is the applied
// form lambda1^2 / (l^lambda3)^2; ScaledBySeriesSd additionally divides by
// the series standard deviation squared.
enum class OwnLagVariance { LagDecayOnly, ScaledBySeriesSd };

// Diagonal of the coefficient prior covariance, length n^2 * p. Layout is
// equation-major: entry r*(n*p) + (l-1)*n + j is the coefficient on
// variable j at lag l in equation r (r, j zero-based; l starting at 1).
Eigen::VectorXd build_pi_prior_covariance(
    const ShrinkageParams& lam, const Eigen::VectorXd& series_sd, int n, int p,
    OwnLagVariance variant = OwnLagVariance::LagDecayOnly);

struct SteadyStatePrior {
  Eigen::VectorXd pi_mean;   // n^2*p, same layout as the covariance diagonal
  Eigen::VectorXd psi_mean;  // n*m, column-major vec of the n x m matrix
  Eigen::VectorXd psi_sd;    // n*m, strictly positive

  void validate(int n, int p, int m) const;
};

// Inverse-Wishart prior on the error covariance; (zero scale, zero dof)
// denotes the improper |Sigma|^{-(n+1)/2}.
struct SigmaPrior {
  Eigen::MatrixXd scale;
  double dof = 0.0;

  bool proper() const { return dof > 0.0; }
  static SigmaPrior improper(int n);
};

struct BvarState {
  Eigen::MatrixXd pi;     // n x (n*p)
  Eigen::MatrixXd sigma;  // n x n, symmetric positive definite
  Eigen::MatrixXd psi;    // n x m
};

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale,
                                       double dof, RngStream& rng);
double inverse_wishart_log_pdf(const Eigen::MatrixXd& sigma,
                               const Eigen::MatrixXd& scale, double dof);

// Mean-adjusted VAR sampled over three blocks: coefficients, error
// covariance, and steady state. Exposes the closed-form full conditionals
// required by the Chib estimator.
class SteadyStateBvarModel : public ThreeBlockModel {
public:
  SteadyStateBvarModel(BvarData data, SteadyStatePrior prior,
                       Eigen::VectorXd omega_pi_diag,
                       SigmaPrior sigma_prior = SigmaPrior{});

  int block_dim(int block) const override;
  BlockState initial_state() const override;
  Eigen::VectorXd sample_block(int block, const BlockState& given,
                               RngStream& rng) const override;
  double log_block_conditional(int block, const Eigen::VectorXd& value,
                               const BlockState& given) const override;
  double log_likelihood(const BlockState& state) const override;
  double log_prior(const BlockState& state) const override;

  BvarState unpack(const BlockState& state) const;
  BlockState pack(const BvarState& state) const;

  // Redraws rows p..T-1 of the observation matrix given the parameters,
  // keeping the first p rows fixed (the likelihood conditions on them).
  Eigen::MatrixXd simulate_observations(const BvarState& state,
                                        RngStream& rng) const;

  const BvarData& data() const { return data_; }

private:
  struct GaussianMoments {
    Eigen::VectorXd mean;
    Eigen::LLT<Eigen::MatrixXd> precision_llt;
    double log_det_precision = 0.0;
  };

  GaussianMoments pi_conditional(const BvarState& s) const;
  GaussianMoments psi_conditional(const BvarState& s) const;
  void sigma_conditional(const BvarState& s, Eigen::MatrixXd* scale,
                         double* dof) const;

  BvarData data_;
  SteadyStatePrior prior_;
  Eigen::VectorXd omega_pi_diag_;
  SigmaPrior sigma_prior_;
};

// One full conditional cycle pi -> sigma -> psi; prior covariance built from
// the shrinkage parameters and the sample standard deviations of the data.
BvarState gibbs_sweep(const BvarState& state, const BvarData& data,
                      const SteadyStatePrior& prior, const ShrinkageParams& lam,
                      RngStream& rng);

// Gaussian log likelihood conditional on the first `lags` observations.
double log_likelihood(const BvarState& state, const BvarData& data);

// Gaussian log priors for the coefficients and steady state plus the
// constant-free improper part -((n+1)/2) log det Sigma.
double log_prior_density(const BvarState& state, const SteadyStatePrior& prior,
                         const Eigen::VectorXd& omega_pi_diag);

// Proper conjugate prior for the standard VAR written as Y = X B + E with
// vec(B) | Sigma ~ N(vec(coef_mean), Sigma (x) diag(omega_diag)) and
// Sigma ~ IW(scale, dof). Regressor order: lags block by block, then the
// deterministic columns.
struct ConjugateVarPrior {
  Eigen::MatrixXd coef_mean;   // k x n with k = n*lags + m
  Eigen::VectorXd omega_diag;  // k, strictly positive
  Eigen::MatrixXd scale;       // n x n
  double dof = 0.0;            // > n - 1

  void validate(int n, int k) const;
};

// Prior covariance factor over regressors in the conjugate parameterization:
// lambda1^2 / (l^lambda3 * s_r)^2 for the lag-l block of variable r, and
// intercept_variance for each deterministic column.
Eigen::VectorXd conjugate_omega_from_shrinkage(double lambda1, double lambda3,
                                               const Eigen::VectorXd& series_sd,
                                               int p, int m_det,
                                               double intercept_variance);

// Exact log marginal likelihood of the conjugate VAR via the matrix-t
// normalizing constants. Used as the closed-form cross-check for the
// simulation-based estimator.
double conjugate_logml_oracle(const BvarData& data,
                              const ConjugateVarPrior& prior);

// The conjugate VAR as a Gibbs model: block 1 is the coefficient matrix,
// block 2 the error covariance, block 3 empty.
class ConjugateVarModel : public ThreeBlockModel {
public:
  ConjugateVarModel(BvarData data, ConjugateVarPrior prior);

  int block_dim(int block) const override;
  BlockState initial_state() const override;
  Eigen::VectorXd sample_block(int block, const BlockState& given,
                               RngStream& rng) const override;
  double log_block_conditional(int block, const Eigen::VectorXd& value,
                               const BlockState& given) const override;
  double log_likelihood(const BlockState& state) const override;
  double log_prior(const BlockState& state) const override;

private:
  BvarData data_;
  ConjugateVarPrior prior_;
  Eigen::MatrixXd design_;     // (T-p) x k
  Eigen::MatrixXd response_;   // (T-p) x n
  Eigen::MatrixXd omega_bar_;  // (Omega^-1 + X'X)^-1
  Eigen::MatrixXd coef_bar_;   // posterior coefficient location
};

struct BvarEstimatorOptions {
  long burn = 2500;
  BlockOrder order{};  // fix the coefficient block in the reduced run
  SeOptions se{};
};

// Binds the steady-state model to the incremental Chib estimator; this is
// the objective evaluated by the optimization driver.
std::unique_ptr<PrecisionEstimator> marginal_likelihood_estimator(
    const BvarData& data, const SteadyStatePrior& prior,
    const ShrinkageParams& lam, const BvarEstimatorOptions& options = {});

}  // namespace boop
