#pragma once

#include <Eigen/Dense>

#include "boop/chib.hpp"

namespace boop {

// Location model y_i = t1 + t2 + t3 + e_i with e_i ~ N(0, obs_var) and
// independent N(0, tau_sq[b]) priors on the three components. Only the sum
// is identified, so the blocks are strongly dependent in the posterior;
// every full conditional and the evidence are available in closed form.
class ThreeBlockGaussianToy : public ThreeBlockModel {
public:
  ThreeBlockGaussianToy(Eigen::VectorXd y, double obs_var,
                        Eigen::Vector3d tau_sq);

  int block_dim(int block) const override { return 1; }
  BlockState initial_state() const override;
  Eigen::VectorXd sample_block(int block, const BlockState& given,
                               RngStream& rng) const override;
  double log_block_conditional(int block, const Eigen::VectorXd& value,
                               const BlockState& given) const override;
  double log_likelihood(const BlockState& state) const override;
  double log_prior(const BlockState& state) const override;

  // Exact evidence: y ~ N(0, obs_var I + sum(tau_sq) J).
  double analytic_log_ml() const;

  // Closed-form joint posterior ordinate at a point, for identity checks.
  double log_posterior_density(const Eigen::Vector3d& theta) const;

  // Posterior mean of the free blocks given one block held fixed.
  Eigen::Vector2d conditional_mean_given(int fixed_block,
                                          double fixed_value) const;

private:
  std::pair<double, double> conditional_moments(int block,
                                                const BlockState& given) const;

  Eigen::VectorXd y_;
  double obs_var_;
  Eigen::Vector3d tau_sq_;
  double sum_y_;
};

// Deliberately decoupled blocks: each full conditional ignores the others.
// Useful as an oracle because the Gibbs draws are then iid.
class IndependentBlocksModel : public ThreeBlockModel {
public:
  IndependentBlocksModel(Eigen::Vector3d means, Eigen::Vector3d variances);

  int block_dim(int block) const override { return 1; }
  BlockState initial_state() const override;
  Eigen::VectorXd sample_block(int block, const BlockState& given,
                               RngStream& rng) const override;
  double log_block_conditional(int block, const Eigen::VectorXd& value,
                               const BlockState& given) const override;
  double log_likelihood(const BlockState& state) const override { return 0.0; }
  double log_prior(const BlockState& state) const override { return 0.0; }

private:
  Eigen::Vector3d means_, variances_;
};

}  // namespace boop
