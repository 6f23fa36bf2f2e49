#include "boop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boop/errors.hpp"

namespace boop {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_log_pdf(double z) { return -0.5 * (z * z + kLogTwoPi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double ei_kernel(double z) {
  if (z > -8.0) {
    return normal_pdf(z) + z * normal_cdf(z);
  }
  // Asymptotic expansion of 1 + z * Phi(z)/phi(z) for z << 0:
  //   phi(z) + z Phi(z) = phi(z)/z^2 * (1 - 3/z^2 + 15/z^4 - 105/z^6 + ...)
  // The direct form loses all significant digits to cancellation out here.
  const double inv_z2 = 1.0 / (z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k + 1.0) * inv_z2;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return normal_pdf(z) * inv_z2 * sum;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_multi_gamma(int n, double a) {
  double out = 0.25 * n * (n - 1) * std::log(M_PI);
  for (int i = 1; i <= n; ++i) out += std::lgamma(a + 0.5 * (1 - i));
  return out;
}

double mvn_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov) {
  const Eigen::Index n = x.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mvn_log_pdf: covariance not positive definite");
  }
  const Eigen::VectorXd v = llt.matrixL().solve(x - mean);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    log_det_half += std::log(llt.matrixL()(i, i));
  }
  return -0.5 * static_cast<double>(n) * kLogTwoPi - log_det_half -
         0.5 * v.squaredNorm();
}

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values) {
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size());
}

double sd_of(std::span<const double> values) {
  return std::sqrt(variance_of(values));
}

}  // namespace boop
