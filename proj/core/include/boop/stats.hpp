#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace boop {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

double normal_pdf(double z);
double normal_log_pdf(double z);

// Standard normal CDF, accurate in the left tail (via erfc).
double normal_cdf(double z);

// phi(z) + z * Phi(z), the scaled expected-improvement kernel, computed
// without cancellation for z far in the left tail.
double ei_kernel(double z);

double log_sum_exp(std::span<const double> values);
double log_mean_exp(std::span<const double> values);

// log of the multivariate gamma function Gamma_n(a).
double log_multi_gamma(int n, double a);

// Log density of N(mean, cov) at x; cov must be symmetric positive definite.
double mvn_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov);

double mean_of(std::span<const double> values);
double variance_of(std::span<const double> values);  // denominator n
double sd_of(std::span<const double> values);

}  // namespace boop
