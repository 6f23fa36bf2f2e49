#pragma once

// Independent reference implementations used only by the tests. These
// deliberately avoid the library's own linear-algebra paths (LU solves and
// direct summation instead of Cholesky) so that agreement is meaningful.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline double normal_log_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

// Dense multivariate normal log density via LU decomposition.
inline double mvn_log_pdf_lu(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& cov) {
  const Eigen::Index n = x.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  const Eigen::VectorXd d = x - mean;
  const double quad = d.dot(lu.solve(d));
  const double log_det = std::log(std::abs(lu.determinant()));
  return -0.5 * (n * std::log(2.0 * M_PI) + log_det + quad);
}

// Brute-force GP conditioning: build the joint (n+1) covariance including
// the query point and apply the partitioned-Gaussian formula with LU solves.
struct ConditionalMoments {
  double mean = 0.0;
  double sd = 0.0;
};

inline ConditionalMoments partitioned_gaussian_conditional(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        kernel,
    const std::vector<Eigen::VectorXd>& inputs,
    const std::vector<double>& observations,
    const std::vector<double>& noise_variances, double prior_mean,
    const Eigen::VectorXd& x_star) {
  const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel(inputs[i], inputs[j]);
    }
    k(i, i) += noise_variances[i];
  }
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star[i] = kernel(inputs[i], x_star);
  const double k_ss = kernel(x_star, x_star);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  Eigen::VectorXd centered(n);
  for (Eigen::Index i = 0; i < n; ++i) centered[i] = observations[i] - prior_mean;
  const Eigen::VectorXd w = lu.solve(k_star);

  ConditionalMoments out;
  out.mean = prior_mean + k_star.dot(lu.solve(centered));
  out.sd = std::sqrt(std::max(0.0, k_ss - k_star.dot(w)));
  return out;
}

// Monte Carlo E[max(m + s Z - f_max, 0)] with its standard error.
struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

inline McEstimate mc_expected_improvement(double m, double s, double f_max,
                                          long draws, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double v = std::max(m + s * normal(engine) - f_max, 0.0);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sum_sq / draws - mean * mean);
  return {mean, std::sqrt(var / draws)};
}

// Bartlett long-run variance of a scalar series divided by its length;
// used for autocorrelation-aware Monte Carlo standard errors.
inline double long_run_variance_of_mean(const std::vector<double>& series,
                                        int lags) {
  const double n = static_cast<double>(series.size());
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  double acc = 0.0;
  for (double v : series) acc += (v - mean) * (v - mean);
  acc /= n;
  for (int s = 1; s <= lags; ++s) {
    double g = 0.0;
    for (std::size_t t = s; t < series.size(); ++t) {
      g += (series[t] - mean) * (series[t - s] - mean);
    }
    g /= n;
    acc += 2.0 * (1.0 - static_cast<double>(s) / (lags + 1)) * g;
  }
  return acc / n;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double correlation(const std::vector<double>& a,
                          const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Nested Simpson quadrature on a rectangle, for low-dimensional evidence
// integrals.
inline double simpson_2d(const std::function<double(double, double)>& f,
                         double ax, double bx, double ay, double by, int nx,
                         int ny) {
  if (nx % 2 != 0) ++nx;
  if (ny % 2 != 0) ++ny;
  const double hx = (bx - ax) / nx;
  const double hy = (by - ay) / ny;
  auto wy = [&](int j) { return j == 0 || j == ny ? 1.0 : (j % 2 ? 4.0 : 2.0); };
  auto wx = [&](int i) { return i == 0 || i == nx ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double acc = 0.0;
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      acc += wx(i) * wy(j) * f(ax + i * hx, ay + j * hy);
    }
  }
  return acc * hx * hy / 9.0;
}

}  // namespace oracle
