#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "boop/evaluator.hpp"
#include "boop/rng.hpp"

namespace boop {

using BlockState = std::array<Eigen::VectorXd, 3>;

// A posterior that factorizes into three Gibbs blocks with closed-form full
// conditionals. Blocks may be empty (dimension zero), which drops them from
// the factorization.
class ThreeBlockModel {
public:
  virtual ~ThreeBlockModel() = default;

  virtual int block_dim(int block) const = 0;
  virtual BlockState initial_state() const = 0;

  // Draw block `block` from its full conditional given the other blocks.
  virtual Eigen::VectorXd sample_block(int block, const BlockState& given,
                                       RngStream& rng) const = 0;

  // log p(value | other blocks of `given`, y) for block `block`.
  virtual double log_block_conditional(int block, const Eigen::VectorXd& value,
                                       const BlockState& given) const = 0;

  virtual double log_likelihood(const BlockState& state) const = 0;
  virtual double log_prior(const BlockState& state) const = 0;
};

struct DrawStore {
  std::vector<BlockState> draws;

  std::size_t size() const { return draws.size(); }
};

// Cycles block 1 -> 2 -> 3 each iteration; retains the draws after burn-in.
DrawStore run_full_gibbs(const ThreeBlockModel& model, long iterations,
                         long burn, RngStream& rng);

// Same cycle with one block frozen at the supplied value every iteration.
DrawStore run_reduced_gibbs(const ThreeBlockModel& model, int fixed_block,
                            const Eigen::VectorXd& fixed_value,
                            long iterations, long burn, RngStream& rng,
                            const BlockState* start = nullptr);

// Component-wise posterior mean of the retained draws: a deterministic,
// reproducible high-density anchor point.
BlockState select_theta_star(const DrawStore& draws);

// Which factorization role each block plays:
//   marginal - ordinate estimated by averaging over the full run,
//   reduced  - ordinate estimated from the run with `marginal` frozen,
//   exact    - full-conditional ordinate evaluated in closed form.
struct BlockOrder {
  int marginal = 0;
  int reduced = 1;
  int exact = 2;

  void validate() const;
};

// The two Monte Carlo ordinate series, rescaled so the largest entry is 1;
// log_scale holds the shift taken out. The delta-method standard error is
// invariant to this scaling.
struct HSeries {
  std::vector<double> h1, h2;
  double log_scale1 = 0.0, log_scale2 = 0.0;
};

struct ChibComponents {
  double log_lik = 0.0;
  double log_prior = 0.0;
  double log_post_marginal = 0.0;
  double log_post_reduced = 0.0;
  double log_post_exact = 0.0;
};

struct ChibEstimate {
  double log_ml = 0.0;
  double se = 0.0;
  ChibComponents components;
  long g1 = 0, g2 = 0;
  int q_used = 0;
};

struct SeOptions {
  bool aic_selection = true;  // pick the Newey-West lag by VAR-AIC
  int fixed_q = 10;           // used when selection is off or falls back
  int max_q = 10;
};

struct ChibResult {
  ChibEstimate estimate;
  HSeries h;
};

// Full Chib estimate with asymptotic standard errors from one full and one
// reduced Gibbs run.
ChibResult chib_logml(const ThreeBlockModel& model, long g1, long g2,
                      long burn, RngStream& rng, const BlockOrder& order = {},
                      const SeOptions& se = {});

// Bartlett-weighted long-run covariance of the bivariate h process,
// divided by the series length.
Eigen::Matrix2d nw_variance(const HSeries& h, int q);

struct QSelection {
  int q = 0;
  bool fallback = false;  // singular design forced the conservative default
};

// Lag choice minimizing the AIC of a VAR(q) fitted to the demeaned series.
QSelection select_q(const HSeries& h, int max_q);

// sqrt(g' V g) with gradient g = (1/h1_bar, 1/h2_bar).
double delta_method_se(const Eigen::Matrix2d& var_h,
                       const Eigen::Vector2d& h_bar);

// Incremental adapter exposing the Chib estimator as a PrecisionEstimator.
// The first extension runs the full chain past burn-in, freezes the anchor
// point at the posterior mean of the draws seen so far, and starts the
// reduced chain; later extensions advance both chains in lockstep.
// draws_used() counts full-chain iterations (burn-in included).
class IncrementalChibEstimator : public PrecisionEstimator {
public:
  IncrementalChibEstimator(std::shared_ptr<const ThreeBlockModel> model,
                           long burn, BlockOrder order = {},
                           SeOptions se = {});

  Checkpoint extend(long draws, RngStream& rng) override;
  long draws_used() const override { return full_iterations_; }

  const ChibComponents& components() const { return components_; }
  int last_q() const { return last_q_; }

private:
  Checkpoint current_estimate();

  std::shared_ptr<const ThreeBlockModel> model_;
  long burn_;
  BlockOrder order_;
  SeOptions se_;

  long full_iterations_ = 0;
  long reduced_iterations_ = 0;
  bool frozen_ = false;
  BlockState full_state_;
  BlockState reduced_state_;
  BlockState theta_star_;
  std::vector<BlockState> warmup_draws_;  // retained until the anchor freezes
  std::vector<double> log_h1_, log_h2_;
  ChibComponents components_;
  int last_q_ = 0;
};

}  // namespace boop
