#include "boop/toy_models.hpp"

#include <cmath>

#include "boop/errors.hpp"
#include "boop/stats.hpp"

namespace boop {

ThreeBlockGaussianToy::ThreeBlockGaussianToy(Eigen::VectorXd y, double obs_var,
                                             Eigen::Vector3d tau_sq)
    : y_(std::move(y)), obs_var_(obs_var), tau_sq_(tau_sq) {
  if (y_.size() == 0 || !(obs_var_ > 0.0) || (tau_sq_.array() <= 0.0).any()) {
    throw NumericalError("ThreeBlockGaussianToy: bad inputs");
  }
  sum_y_ = y_.sum();
}

BlockState ThreeBlockGaussianToy::initial_state() const {
  BlockState s;
  for (int b = 0; b < 3; ++b) s[b] = Eigen::VectorXd::Zero(1);
  return s;
}

std::pair<double, double> ThreeBlockGaussianToy::conditional_moments(
    int block, const BlockState& given) const {
  const double t = static_cast<double>(y_.size());
  double others = 0.0;
  for (int b = 0; b < 3; ++b) {
    if (b != block) others += given[b][0];
  }
  const double prec = 1.0 / tau_sq_[block] + t / obs_var_;
  const double mean = (sum_y_ - t * others) / obs_var_ / prec;
  return {mean, 1.0 / prec};
}

Eigen::VectorXd ThreeBlockGaussianToy::sample_block(int block,
                                                    const BlockState& given,
                                                    RngStream& rng) const {
  const auto [mean, var] = conditional_moments(block, given);
  Eigen::VectorXd out(1);
  out[0] = mean + std::sqrt(var) * rng.normal();
  return out;
}

double ThreeBlockGaussianToy::log_block_conditional(
    int block, const Eigen::VectorXd& value, const BlockState& given) const {
  const auto [mean, var] = conditional_moments(block, given);
  const double z = (value[0] - mean) / std::sqrt(var);
  return -0.5 * (z * z + std::log(var) + kLogTwoPi);
}

double ThreeBlockGaussianToy::log_likelihood(const BlockState& state) const {
  const double level = state[0][0] + state[1][0] + state[2][0];
  double out = 0.0;
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    const double z = y_[i] - level;
    out += -0.5 * (z * z / obs_var_ + std::log(obs_var_) + kLogTwoPi);
  }
  return out;
}

double ThreeBlockGaussianToy::log_prior(const BlockState& state) const {
  double out = 0.0;
  for (int b = 0; b < 3; ++b) {
    const double z = state[b][0];
    out += -0.5 * (z * z / tau_sq_[b] + std::log(tau_sq_[b]) + kLogTwoPi);
  }
  return out;
}

double ThreeBlockGaussianToy::analytic_log_ml() const {
  const Eigen::Index t = y_.size();
  const double tau_total = tau_sq_.sum();
  const Eigen::MatrixXd cov =
      obs_var_ * Eigen::MatrixXd::Identity(t, t) +
      tau_total * Eigen::MatrixXd::Ones(t, t);
  return mvn_log_pdf(y_, Eigen::VectorXd::Zero(t), cov);
}

double ThreeBlockGaussianToy::log_posterior_density(
    const Eigen::Vector3d& theta) const {
  const double t = static_cast<double>(y_.size());
  Eigen::Matrix3d lambda = (t / obs_var_) * Eigen::Matrix3d::Ones();
  for (int b = 0; b < 3; ++b) lambda(b, b) += 1.0 / tau_sq_[b];
  const Eigen::Vector3d linear =
      (sum_y_ / obs_var_) * Eigen::Vector3d::Ones();
  const Eigen::Vector3d mu = lambda.ldlt().solve(linear);
  const Eigen::Vector3d diff = theta - mu;
  return 0.5 * std::log(lambda.determinant()) - 1.5 * kLogTwoPi -
         0.5 * diff.dot(lambda * diff);
}

Eigen::Vector2d ThreeBlockGaussianToy::conditional_mean_given(
    int fixed_block, double fixed_value) const {
  const double t = static_cast<double>(y_.size());
  std::array<int, 2> free{};
  int k = 0;
  for (int b = 0; b < 3; ++b) {
    if (b != fixed_block) free[k++] = b;
  }
  Eigen::Matrix2d lambda = (t / obs_var_) * Eigen::Matrix2d::Ones();
  lambda(0, 0) += 1.0 / tau_sq_[free[0]];
  lambda(1, 1) += 1.0 / tau_sq_[free[1]];
  const Eigen::Vector2d linear =
      ((sum_y_ - t * fixed_value) / obs_var_) * Eigen::Vector2d::Ones();
  return lambda.ldlt().solve(linear);
}

IndependentBlocksModel::IndependentBlocksModel(Eigen::Vector3d means,
                                               Eigen::Vector3d variances)
    : means_(means), variances_(variances) {
  if ((variances_.array() <= 0.0).any()) {
    throw NumericalError("IndependentBlocksModel: variances must be positive");
  }
}

BlockState IndependentBlocksModel::initial_state() const {
  BlockState s;
  for (int b = 0; b < 3; ++b) {
    s[b] = Eigen::VectorXd::Constant(1, means_[b]);
  }
  return s;
}

Eigen::VectorXd IndependentBlocksModel::sample_block(int block,
                                                     const BlockState&,
                                                     RngStream& rng) const {
  Eigen::VectorXd out(1);
  out[0] = means_[block] + std::sqrt(variances_[block]) * rng.normal();
  return out;
}

double IndependentBlocksModel::log_block_conditional(
    int block, const Eigen::VectorXd& value, const BlockState&) const {
  const double z = (value[0] - means_[block]) / std::sqrt(variances_[block]);
  return -0.5 * (z * z + std::log(variances_[block]) + kLogTwoPi);
}

}  // namespace boop
