#include "boop/bvar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boop/errors.hpp"
#include "boop/stats.hpp"

namespace boop {

namespace {

Eigen::VectorXd column_sds(const Eigen::MatrixXd& y) {
  Eigen::VectorXd out(y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double m = y.col(j).mean();
    out[j] = std::sqrt((y.col(j).array() - m).square().mean());
  }
  return out;
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& a,
                                        const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << ": matrix of order " << a.rows()
        << " is not positive definite (min diag " << a.diagonal().minCoeff()
        << ", max diag " << a.diagonal().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < llt.matrixL().rows(); ++i) {
    s += std::log(llt.matrixL()(i, i));
  }
  return 2.0 * s;
}

// Gaussian log density parameterized by the precision matrix.
double gaussian_log_pdf_precision(const Eigen::VectorXd& value,
                                  const Eigen::VectorXd& mean,
                                  const Eigen::LLT<Eigen::MatrixXd>& prec_llt,
                                  double log_det_precision) {
  const Eigen::Index d = value.size();
  const Eigen::VectorXd diff = value - mean;
  const double quad = diff.dot(prec_llt.matrixL() *
                               (prec_llt.matrixL().transpose() * diff));
  return 0.5 * log_det_precision - 0.5 * static_cast<double>(d) * kLogTwoPi -
         0.5 * quad;
}

Eigen::VectorXd sample_gaussian_precision(
    const Eigen::VectorXd& mean, const Eigen::LLT<Eigen::MatrixXd>& prec_llt,
    RngStream& rng) {
  const Eigen::Index d = mean.size();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  // cov = P^-1 = L^-T L^-1, so mean + L^-T z has the right covariance.
  return mean + prec_llt.matrixL().transpose().solve(z);
}

}  // namespace

void BvarData::validate() const {
  if (lags < 0) throw DataError("BvarData: lags must be >= 0");
  if (y.rows() != x.rows()) {
    throw DataError("BvarData: y and x row counts differ");
  }
  if (!y.allFinite() || !x.allFinite()) {
    throw DataError("BvarData: non-finite values");
  }
  if (t() <= n() * lags + m()) {
    throw DataError("BvarData: too few observations for the model size");
  }
}

BvarData BvarData::with_intercept(Eigen::MatrixXd y, int lags) {
  BvarData d;
  d.x = Eigen::MatrixXd::Ones(y.rows(), 1);
  d.y = std::move(y);
  d.lags = lags;
  return d;
}

void ShrinkageParams::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(lambda3 > 0.0)) {
    throw NumericalError("ShrinkageParams: lambdas must be positive");
  }
}

Eigen::VectorXd build_pi_prior_covariance(const ShrinkageParams& lam,
                                          const Eigen::VectorXd& series_sd,
                                          int n, int p,
                                          OwnLagVariance variant) {
  lam.validate();
  if (series_sd.size() != n || (series_sd.array() <= 0.0).any()) {
    throw NumericalError("build_pi_prior_covariance: need positive sds");
  }
  Eigen::VectorXd omega(n * n * p);
  for (int r = 0; r < n; ++r) {
    for (int l = 1; l <= p; ++l) {
      const double decay = std::pow(static_cast<double>(l), lam.lambda3);
      for (int j = 0; j < n; ++j) {
        double value;
        if (j == r) {
          value = lam.lambda1 * lam.lambda1 / (decay * decay);
          if (variant == OwnLagVariance::ScaledBySeriesSd) {
            value /= series_sd[r] * series_sd[r];
          }
        } else {
          const double num = lam.lambda1 * lam.lambda2 * series_sd[r];
          const double den = decay * series_sd[j];
          value = (num * num) / (den * den);
        }
        omega[r * n * p + (l - 1) * n + j] = value;
      }
    }
  }
  return omega;
}

void SteadyStatePrior::validate(int n, int p, int m) const {
  if (pi_mean.size() != n * n * p) {
    throw ConfigError("SteadyStatePrior: pi_mean must have n^2*p entries");
  }
  if (psi_mean.size() != n * m || psi_sd.size() != n * m) {
    throw ConfigError("SteadyStatePrior: psi moments must have n*m entries");
  }
  if ((psi_sd.array() <= 0.0).any()) {
    throw ConfigError("SteadyStatePrior: psi_sd must be positive");
  }
}

SigmaPrior SigmaPrior::improper(int n) {
  SigmaPrior p;
  p.scale = Eigen::MatrixXd::Zero(n, n);
  p.dof = 0.0;
  return p;
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale,
                                       double dof, RngStream& rng) {
  const Eigen::Index n = scale.rows();
  if (!(dof > static_cast<double>(n) - 1.0)) {
    throw NumericalError("sample_inverse_wishart: dof too small");
  }
  const Eigen::MatrixXd scale_inv =
      checked_llt(scale, "inverse-Wishart scale")
          .solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd c =
      checked_llt(scale_inv, "inverse-Wishart inverted scale").matrixL();

  // Bartlett decomposition of a Wishart(scale^-1, dof) draw.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd t = c * a;
  const Eigen::MatrixXd w = t * t.transpose();
  Eigen::MatrixXd sigma =
      checked_llt(w, "Wishart draw").solve(Eigen::MatrixXd::Identity(n, n));
  return 0.5 * (sigma + sigma.transpose());
}

double inverse_wishart_log_pdf(const Eigen::MatrixXd& sigma,
                               const Eigen::MatrixXd& scale, double dof) {
  const Eigen::Index n = sigma.rows();
  const auto scale_llt = checked_llt(scale, "inverse-Wishart scale");
  const auto sigma_llt = checked_llt(sigma, "inverse-Wishart argument");
  const double log_det_scale = log_det_from_llt(scale_llt);
  const double log_det_sigma = log_det_from_llt(sigma_llt);
  const double trace_term =
      sigma_llt.solve(scale).trace();
  return 0.5 * dof * log_det_scale -
         0.5 * dof * static_cast<double>(n) * std::log(2.0) -
         log_multi_gamma(static_cast<int>(n), 0.5 * dof) -
         0.5 * (dof + static_cast<double>(n) + 1.0) * log_det_sigma -
         0.5 * trace_term;
}

SteadyStateBvarModel::SteadyStateBvarModel(BvarData data,
                                           SteadyStatePrior prior,
                                           Eigen::VectorXd omega_pi_diag,
                                           SigmaPrior sigma_prior)
    : data_(std::move(data)),
      prior_(std::move(prior)),
      omega_pi_diag_(std::move(omega_pi_diag)),
      sigma_prior_(std::move(sigma_prior)) {
  data_.validate();
  if (data_.lags < 1) {
    throw DataError("SteadyStateBvarModel: lag order must be >= 1");
  }
  prior_.validate(data_.n(), data_.lags, data_.m());
  if (omega_pi_diag_.size() != data_.n() * data_.n() * data_.lags ||
      (omega_pi_diag_.array() <= 0.0).any()) {
    throw NumericalError("SteadyStateBvarModel: bad coefficient covariance");
  }
  if (sigma_prior_.scale.size() == 0) {
    sigma_prior_ = SigmaPrior::improper(data_.n());
  }
}

int SteadyStateBvarModel::block_dim(int block) const {
  const int n = data_.n();
  switch (block) {
    case 0: return n * n * data_.lags;
    case 1: return n * n;
    case 2: return n * data_.m();
  }
  throw NumericalError("block_dim: bad block index");
}

BvarState SteadyStateBvarModel::unpack(const BlockState& state) const {
  const int n = data_.n();
  const int p = data_.lags;
  const int m = data_.m();
  BvarState s;
  s.pi.resize(n, n * p);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n * p; ++c) s.pi(r, c) = state[0][r * n * p + c];
  }
  s.sigma.resize(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) s.sigma(r, c) = state[1][r * n + c];
  }
  s.psi.resize(n, m);
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < n; ++r) s.psi(r, c) = state[2][c * n + r];
  }
  return s;
}

BlockState SteadyStateBvarModel::pack(const BvarState& s) const {
  const int n = data_.n();
  const int p = data_.lags;
  const int m = data_.m();
  BlockState out;
  out[0].resize(n * n * p);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n * p; ++c) out[0][r * n * p + c] = s.pi(r, c);
  }
  out[1].resize(n * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out[1][r * n + c] = s.sigma(r, c);
  }
  out[2].resize(n * m);
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < n; ++r) out[2][c * n + r] = s.psi(r, c);
  }
  return out;
}

BlockState SteadyStateBvarModel::initial_state() const {
  const int n = data_.n();
  BvarState s;
  s.pi.resize(n, n * data_.lags);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n * data_.lags; ++c) {
      s.pi(r, c) = prior_.pi_mean[r * n * data_.lags + c];
    }
  }
  const Eigen::VectorXd sds = column_sds(data_.y);
  s.sigma = (sds.array().square() + 1e-8).matrix().asDiagonal();
  s.psi.resize(n, data_.m());
  for (int c = 0; c < data_.m(); ++c) {
    for (int r = 0; r < n; ++r) s.psi(r, c) = prior_.psi_mean[c * n + r];
  }
  return pack(s);
}

SteadyStateBvarModel::GaussianMoments SteadyStateBvarModel::pi_conditional(
    const BvarState& s) const {
  const int n = data_.n();
  const int p = data_.lags;
  const int t_eff = data_.t() - p;
  const int dim = n * n * p;

  // Demeaned data and its lag stack.
  const Eigen::MatrixXd d = data_.y - data_.x * s.psi.transpose();
  Eigen::MatrixXd z(t_eff, n * p);
  Eigen::MatrixXd resp(t_eff, n);
  for (int t = 0; t < t_eff; ++t) {
    resp.row(t) = d.row(p + t);
    for (int l = 1; l <= p; ++l) {
      z.block(t, (l - 1) * n, 1, n) = d.row(p + t - l);
    }
  }

  const Eigen::MatrixXd w = checked_llt(s.sigma, "pi conditional: sigma")
                                .solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd ztz = z.transpose() * z;
  Eigen::MatrixXd prec(dim, dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      prec.block(r * n * p, c * n * p, n * p, n * p) = w(r, c) * ztz;
    }
  }
  prec.diagonal() += omega_pi_diag_.cwiseInverse();

  const Eigen::MatrixXd lin = z.transpose() * resp * w;  // np x n
  Eigen::VectorXd c(dim);
  for (int r = 0; r < n; ++r) c.segment(r * n * p, n * p) = lin.col(r);
  c += prior_.pi_mean.cwiseQuotient(omega_pi_diag_);

  GaussianMoments out;
  out.precision_llt = checked_llt(prec, "pi conditional: precision");
  out.log_det_precision = log_det_from_llt(out.precision_llt);
  out.mean = out.precision_llt.solve(c);
  return out;
}

void SteadyStateBvarModel::sigma_conditional(const BvarState& s,
                                             Eigen::MatrixXd* scale,
                                             double* dof) const {
  const int p = data_.lags;
  const int t_eff = data_.t() - p;
  const Eigen::MatrixXd d = data_.y - data_.x * s.psi.transpose();
  Eigen::MatrixXd resid(t_eff, data_.n());
  for (int t = 0; t < t_eff; ++t) {
    Eigen::VectorXd eps = d.row(p + t).transpose();
    for (int l = 1; l <= p; ++l) {
      eps -= s.pi.block(0, (l - 1) * data_.n(), data_.n(), data_.n()) *
             d.row(p + t - l).transpose();
    }
    resid.row(t) = eps.transpose();
  }
  *scale = sigma_prior_.scale + resid.transpose() * resid;
  *dof = sigma_prior_.dof + static_cast<double>(t_eff);
}

SteadyStateBvarModel::GaussianMoments SteadyStateBvarModel::psi_conditional(
    const BvarState& s) const {
  const int n = data_.n();
  const int p = data_.lags;
  const int m = data_.m();
  const int dim = n * m;

  const Eigen::MatrixXd w = checked_llt(s.sigma, "psi conditional: sigma")
                                .solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  prec.diagonal() = prior_.psi_sd.array().square().inverse().matrix();
  c = prior_.psi_mean.cwiseQuotient(prior_.psi_sd.array().square().matrix());

  for (int t = p; t < data_.t(); ++t) {
    // u_t = y_t - sum_l Pi_l y_{t-l};  U_t = x_t' (x) I - sum_l x_{t-l}' (x) Pi_l
    Eigen::VectorXd u = data_.y.row(t).transpose();
    Eigen::MatrixXd big_u(n, dim);
    for (int c2 = 0; c2 < m; ++c2) {
      big_u.block(0, c2 * n, n, n) =
          data_.x(t, c2) * Eigen::MatrixXd::Identity(n, n);
    }
    for (int l = 1; l <= p; ++l) {
      const auto pi_l = s.pi.block(0, (l - 1) * n, n, n);
      u -= pi_l * data_.y.row(t - l).transpose();
      for (int c2 = 0; c2 < m; ++c2) {
        big_u.block(0, c2 * n, n, n) -= data_.x(t - l, c2) * pi_l;
      }
    }
    const Eigen::MatrixXd wu = w * big_u;
    prec += big_u.transpose() * wu;
    c += wu.transpose() * u;
  }

  GaussianMoments out;
  out.precision_llt = checked_llt(prec, "psi conditional: precision");
  out.log_det_precision = log_det_from_llt(out.precision_llt);
  out.mean = out.precision_llt.solve(c);
  return out;
}

Eigen::VectorXd SteadyStateBvarModel::sample_block(int block,
                                                   const BlockState& given,
                                                   RngStream& rng) const {
  const BvarState s = unpack(given);
  switch (block) {
    case 0: {
      const GaussianMoments mom = pi_conditional(s);
      return sample_gaussian_precision(mom.mean, mom.precision_llt, rng);
    }
    case 1: {
      Eigen::MatrixXd scale;
      double dof = 0.0;
      sigma_conditional(s, &scale, &dof);
      const Eigen::MatrixXd sigma = sample_inverse_wishart(scale, dof, rng);
      Eigen::VectorXd out(data_.n() * data_.n());
      for (int r = 0; r < data_.n(); ++r) {
        for (int c = 0; c < data_.n(); ++c) out[r * data_.n() + c] = sigma(r, c);
      }
      return out;
    }
    case 2: {
      const GaussianMoments mom = psi_conditional(s);
      return sample_gaussian_precision(mom.mean, mom.precision_llt, rng);
    }
  }
  throw NumericalError("sample_block: bad block index");
}

double SteadyStateBvarModel::log_block_conditional(
    int block, const Eigen::VectorXd& value, const BlockState& given) const {
  const BvarState s = unpack(given);
  switch (block) {
    case 0: {
      const GaussianMoments mom = pi_conditional(s);
      return gaussian_log_pdf_precision(value, mom.mean, mom.precision_llt,
                                        mom.log_det_precision);
    }
    case 1: {
      Eigen::MatrixXd scale;
      double dof = 0.0;
      sigma_conditional(s, &scale, &dof);
      const int n = data_.n();
      Eigen::MatrixXd sigma(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) sigma(r, c) = value[r * n + c];
      }
      return inverse_wishart_log_pdf(sigma, scale, dof);
    }
    case 2: {
      const GaussianMoments mom = psi_conditional(s);
      return gaussian_log_pdf_precision(value, mom.mean, mom.precision_llt,
                                        mom.log_det_precision);
    }
  }
  throw NumericalError("log_block_conditional: bad block index");
}

double SteadyStateBvarModel::log_likelihood(const BlockState& state) const {
  return boop::log_likelihood(unpack(state), data_);
}

double SteadyStateBvarModel::log_prior(const BlockState& state) const {
  const BvarState s = unpack(state);
  if (sigma_prior_.proper()) {
    double out = inverse_wishart_log_pdf(s.sigma, sigma_prior_.scale,
                                         sigma_prior_.dof);
    const BvarState tmp = s;
    // Gaussian parts reuse the improper-path helper then swap the sigma term.
    out += log_prior_density(tmp, prior_, omega_pi_diag_);
    const auto llt = checked_llt(s.sigma, "log_prior: sigma");
    out += 0.5 * (data_.n() + 1.0) * log_det_from_llt(llt);
    return out;
  }
  return log_prior_density(s, prior_, omega_pi_diag_);
}

Eigen::MatrixXd SteadyStateBvarModel::simulate_observations(
    const BvarState& state, RngStream& rng) const {
  const int n = data_.n();
  const int p = data_.lags;
  Eigen::MatrixXd y = data_.y;
  const Eigen::MatrixXd chol_sigma =
      checked_llt(state.sigma, "simulate: sigma").matrixL();
  for (int t = p; t < data_.t(); ++t) {
    Eigen::VectorXd mean = state.psi * data_.x.row(t).transpose();
    for (int l = 1; l <= p; ++l) {
      const Eigen::VectorXd lagged =
          y.row(t - l).transpose() -
          state.psi * data_.x.row(t - l).transpose();
      mean += state.pi.block(0, (l - 1) * n, n, n) * lagged;
    }
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    y.row(t) = (mean + chol_sigma * z).transpose();
  }
  return y;
}

BvarState gibbs_sweep(const BvarState& state, const BvarData& data,
                      const SteadyStatePrior& prior, const ShrinkageParams& lam,
                      RngStream& rng) {
  const Eigen::VectorXd omega =
      build_pi_prior_covariance(lam, column_sds(data.y), data.n(), data.lags);
  SteadyStateBvarModel model(data, prior, omega);
  BlockState s = model.pack(state);
  s[0] = model.sample_block(0, s, rng);
  s[1] = model.sample_block(1, s, rng);
  s[2] = model.sample_block(2, s, rng);
  return model.unpack(s);
}

double log_likelihood(const BvarState& state, const BvarData& data) {
  const int n = data.n();
  const int p = data.lags;
  const auto llt = checked_llt(state.sigma, "log_likelihood: sigma");
  const double log_det = log_det_from_llt(llt);
  const Eigen::MatrixXd d = data.y - data.x * state.psi.transpose();
  double out = 0.0;
  for (int t = p; t < data.t(); ++t) {
    Eigen::VectorXd eps = d.row(t).transpose();
    for (int l = 1; l <= p; ++l) {
      eps -= state.pi.block(0, (l - 1) * n, n, n) * d.row(t - l).transpose();
    }
    const Eigen::VectorXd v = llt.matrixL().solve(eps);
    out += -0.5 * (n * kLogTwoPi + log_det + v.squaredNorm());
  }
  return out;
}

double log_prior_density(const BvarState& state, const SteadyStatePrior& prior,
                         const Eigen::VectorXd& omega_pi_diag) {
  const int n = static_cast<int>(state.pi.rows());
  const int np = static_cast<int>(state.pi.cols());
  const int m = static_cast<int>(state.psi.cols());

  double out = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < np; ++c) {
      const int i = r * np + c;
      const double var = omega_pi_diag[i];
      const double diff = state.pi(r, c) - prior.pi_mean[i];
      out += -0.5 * (kLogTwoPi + std::log(var) + diff * diff / var);
    }
  }
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < n; ++r) {
      const int i = c * n + r;
      const double sd = prior.psi_sd[i];
      const double diff = state.psi(r, c) - prior.psi_mean[i];
      out += -0.5 * (kLogTwoPi + 2.0 * std::log(sd) + diff * diff / (sd * sd));
    }
  }
  const auto llt = checked_llt(state.sigma, "log_prior_density: sigma");
  out += -0.5 * (n + 1.0) * log_det_from_llt(llt);
  return out;
}

void ConjugateVarPrior::validate(int n, int k) const {
  if (coef_mean.rows() != k || coef_mean.cols() != n) {
    throw ConfigError("ConjugateVarPrior: coef_mean must be k x n");
  }
  if (omega_diag.size() != k || (omega_diag.array() <= 0.0).any()) {
    throw ConfigError("ConjugateVarPrior: omega_diag must be positive");
  }
  if (scale.rows() != n || scale.cols() != n ||
      !(dof > static_cast<double>(n) - 1.0)) {
    throw ConfigError("ConjugateVarPrior: improper inverse-Wishart part");
  }
}

Eigen::VectorXd conjugate_omega_from_shrinkage(double lambda1, double lambda3,
                                               const Eigen::VectorXd& series_sd,
                                               int p, int m_det,
                                               double intercept_variance) {
  const int n = static_cast<int>(series_sd.size());
  Eigen::VectorXd omega(n * p + m_det);
  for (int l = 1; l <= p; ++l) {
    const double decay = std::pow(static_cast<double>(l), lambda3);
    for (int r = 0; r < n; ++r) {
      const double denom = decay * series_sd[r];
      omega[(l - 1) * n + r] = lambda1 * lambda1 / (denom * denom);
    }
  }
  for (int j = 0; j < m_det; ++j) omega[n * p + j] = intercept_variance;
  return omega;
}

namespace {

struct ConjugateDesign {
  Eigen::MatrixXd x;  // (T-p) x k
  Eigen::MatrixXd y;  // (T-p) x n
};

ConjugateDesign conjugate_design(const BvarData& data) {
  const int n = data.n();
  const int p = data.lags;
  const int m = data.m();
  const int t_eff = data.t() - p;
  ConjugateDesign d;
  d.x.resize(t_eff, n * p + m);
  d.y.resize(t_eff, n);
  for (int t = 0; t < t_eff; ++t) {
    d.y.row(t) = data.y.row(p + t);
    for (int l = 1; l <= p; ++l) {
      d.x.block(t, (l - 1) * n, 1, n) = data.y.row(p + t - l);
    }
    d.x.block(t, n * p, 1, m) = data.x.row(p + t);
  }
  return d;
}

}  // namespace

double conjugate_logml_oracle(const BvarData& data,
                              const ConjugateVarPrior& prior) {
  data.validate();
  const int n = data.n();
  const int k = data.n() * data.lags + data.m();
  prior.validate(n, k);

  const ConjugateDesign d = conjugate_design(data);
  const double t_eff = static_cast<double>(d.y.rows());

  const Eigen::MatrixXd omega_inv =
      prior.omega_diag.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd omega_bar_inv =
      omega_inv + d.x.transpose() * d.x;
  const auto bar_llt = checked_llt(omega_bar_inv, "conjugate: omega_bar_inv");
  const Eigen::MatrixXd coef_bar =
      bar_llt.solve(omega_inv * prior.coef_mean + d.x.transpose() * d.y);

  const Eigen::MatrixXd s_bar =
      prior.scale + d.y.transpose() * d.y +
      prior.coef_mean.transpose() * omega_inv * prior.coef_mean -
      coef_bar.transpose() * omega_bar_inv * coef_bar;

  const double log_det_omega = prior.omega_diag.array().log().sum();
  const double log_det_omega_bar = -log_det_from_llt(bar_llt);
  const double log_det_s0 =
      log_det_from_llt(checked_llt(prior.scale, "conjugate: prior scale"));
  const double log_det_s_bar =
      log_det_from_llt(checked_llt(0.5 * (s_bar + s_bar.transpose()),
                                   "conjugate: posterior scale"));
  const double nu_bar = prior.dof + t_eff;

  return -0.5 * n * t_eff * std::log(M_PI) +
         0.5 * n * (log_det_omega_bar - log_det_omega) +
         0.5 * prior.dof * log_det_s0 - 0.5 * nu_bar * log_det_s_bar +
         log_multi_gamma(n, 0.5 * nu_bar) - log_multi_gamma(n, 0.5 * prior.dof);
}

ConjugateVarModel::ConjugateVarModel(BvarData data, ConjugateVarPrior prior)
    : data_(std::move(data)), prior_(std::move(prior)) {
  data_.validate();
  const int k = data_.n() * data_.lags + data_.m();
  prior_.validate(data_.n(), k);
  const ConjugateDesign d = conjugate_design(data_);
  design_ = d.x;
  response_ = d.y;
  const Eigen::MatrixXd omega_inv =
      prior_.omega_diag.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd bar_inv = omega_inv + design_.transpose() * design_;
  omega_bar_ = checked_llt(bar_inv, "ConjugateVarModel: omega_bar")
                   .solve(Eigen::MatrixXd::Identity(k, k));
  omega_bar_ = 0.5 * (omega_bar_ + omega_bar_.transpose());
  coef_bar_ = omega_bar_ * (omega_inv * prior_.coef_mean +
                            design_.transpose() * response_);
}

int ConjugateVarModel::block_dim(int block) const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  switch (block) {
    case 0: return k * n;
    case 1: return n * n;
    case 2: return 0;
  }
  throw NumericalError("block_dim: bad block index");
}

BlockState ConjugateVarModel::initial_state() const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  BlockState s;
  s[0].resize(k * n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < k; ++r) s[0][c * k + r] = prior_.coef_mean(r, c);
  }
  Eigen::MatrixXd sigma0 = prior_.dof > n + 1
                               ? (prior_.scale / (prior_.dof - n - 1)).eval()
                               : prior_.scale;
  s[1].resize(n * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) s[1][r * n + c] = sigma0(r, c);
  }
  s[2].resize(0);
  return s;
}

namespace {

Eigen::MatrixXd unpack_matrix_colmajor(const Eigen::VectorXd& v, int rows,
                                       int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) out(r, c) = v[c * rows + r];
  }
  return out;
}

Eigen::VectorXd pack_matrix_colmajor(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.rows() * m.cols());
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) out[c * m.rows() + r] = m(r, c);
  }
  return out;
}

Eigen::MatrixXd unpack_matrix_rowmajor(const Eigen::VectorXd& v, int rows,
                                       int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = v[r * cols + c];
  }
  return out;
}

Eigen::VectorXd pack_matrix_rowmajor(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.rows() * m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = m(r, c);
  }
  return out;
}

// log of the matrix normal density MN(mean, row_cov = U, col_cov = V).
double matrix_normal_log_pdf(const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& mean,
                             const Eigen::LLT<Eigen::MatrixXd>& u_llt,
                             double log_det_u,
                             const Eigen::LLT<Eigen::MatrixXd>& v_llt,
                             double log_det_v) {
  const double k = static_cast<double>(b.rows());
  const double n = static_cast<double>(b.cols());
  const Eigen::MatrixXd diff = b - mean;
  const Eigen::MatrixXd a = u_llt.solve(diff);      // U^-1 (B - M)
  const Eigen::MatrixXd c = v_llt.solve(diff.transpose());  // V^-1 (B - M)'
  const double trace = (c * a).trace();
  return -0.5 * k * n * kLogTwoPi - 0.5 * k * log_det_v - 0.5 * n * log_det_u -
         0.5 * trace;
}

}  // namespace

Eigen::VectorXd ConjugateVarModel::sample_block(int block,
                                                const BlockState& given,
                                                RngStream& rng) const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  switch (block) {
    case 0: {
      const Eigen::MatrixXd sigma =
          unpack_matrix_rowmajor(given[1], n, n);
      const Eigen::MatrixXd l_omega =
          checked_llt(omega_bar_, "sample B: omega_bar").matrixL();
      const Eigen::MatrixXd l_sigma =
          checked_llt(sigma, "sample B: sigma").matrixL();
      Eigen::MatrixXd z(k, n);
      for (int c = 0; c < n; ++c) {
        for (int r = 0; r < k; ++r) z(r, c) = rng.normal();
      }
      const Eigen::MatrixXd b =
          coef_bar_ + l_omega * z * l_sigma.transpose();
      return pack_matrix_colmajor(b);
    }
    case 1: {
      const Eigen::MatrixXd b = unpack_matrix_colmajor(given[0], k, n);
      const Eigen::MatrixXd resid = response_ - design_ * b;
      const Eigen::MatrixXd centered = b - prior_.coef_mean;
      const Eigen::MatrixXd scale =
          prior_.scale + resid.transpose() * resid +
          centered.transpose() *
              prior_.omega_diag.cwiseInverse().asDiagonal() * centered;
      const double dof =
          prior_.dof + static_cast<double>(response_.rows()) + k;
      return pack_matrix_rowmajor(sample_inverse_wishart(
          0.5 * (scale + scale.transpose()), dof, rng));
    }
    case 2:
      return Eigen::VectorXd(0);
  }
  throw NumericalError("sample_block: bad block index");
}

double ConjugateVarModel::log_block_conditional(int block,
                                                const Eigen::VectorXd& value,
                                                const BlockState& given) const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  switch (block) {
    case 0: {
      const Eigen::MatrixXd sigma = unpack_matrix_rowmajor(given[1], n, n);
      const Eigen::MatrixXd b = unpack_matrix_colmajor(value, k, n);
      const auto u_llt = checked_llt(omega_bar_, "B ordinate: omega_bar");
      const auto v_llt = checked_llt(sigma, "B ordinate: sigma");
      return matrix_normal_log_pdf(b, coef_bar_, u_llt,
                                   log_det_from_llt(u_llt), v_llt,
                                   log_det_from_llt(v_llt));
    }
    case 1: {
      const Eigen::MatrixXd b = unpack_matrix_colmajor(given[0], k, n);
      const Eigen::MatrixXd sigma = unpack_matrix_rowmajor(value, n, n);
      const Eigen::MatrixXd resid = response_ - design_ * b;
      const Eigen::MatrixXd centered = b - prior_.coef_mean;
      const Eigen::MatrixXd scale =
          prior_.scale + resid.transpose() * resid +
          centered.transpose() *
              prior_.omega_diag.cwiseInverse().asDiagonal() * centered;
      const double dof =
          prior_.dof + static_cast<double>(response_.rows()) + k;
      return inverse_wishart_log_pdf(sigma, 0.5 * (scale + scale.transpose()),
                                     dof);
    }
    case 2:
      return 0.0;
  }
  throw NumericalError("log_block_conditional: bad block index");
}

double ConjugateVarModel::log_likelihood(const BlockState& state) const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  const Eigen::MatrixXd b = unpack_matrix_colmajor(state[0], k, n);
  const Eigen::MatrixXd sigma = unpack_matrix_rowmajor(state[1], n, n);
  const auto llt = checked_llt(sigma, "log_likelihood: sigma");
  const double log_det = log_det_from_llt(llt);
  const Eigen::MatrixXd resid = response_ - design_ * b;
  double out = 0.0;
  for (Eigen::Index t = 0; t < resid.rows(); ++t) {
    const Eigen::VectorXd v = llt.matrixL().solve(resid.row(t).transpose());
    out += -0.5 * (n * kLogTwoPi + log_det + v.squaredNorm());
  }
  return out;
}

double ConjugateVarModel::log_prior(const BlockState& state) const {
  const int n = data_.n();
  const int k = n * data_.lags + data_.m();
  const Eigen::MatrixXd b = unpack_matrix_colmajor(state[0], k, n);
  const Eigen::MatrixXd sigma = unpack_matrix_rowmajor(state[1], n, n);

  Eigen::MatrixXd omega = prior_.omega_diag.asDiagonal();
  const auto u_llt = checked_llt(omega, "log_prior: omega");
  const auto v_llt = checked_llt(sigma, "log_prior: sigma");
  return matrix_normal_log_pdf(b, prior_.coef_mean, u_llt,
                               log_det_from_llt(u_llt), v_llt,
                               log_det_from_llt(v_llt)) +
         inverse_wishart_log_pdf(sigma, prior_.scale, prior_.dof);
}

std::unique_ptr<PrecisionEstimator> marginal_likelihood_estimator(
    const BvarData& data, const SteadyStatePrior& prior,
    const ShrinkageParams& lam, const BvarEstimatorOptions& options) {
  data.validate();
  const Eigen::VectorXd omega =
      build_pi_prior_covariance(lam, column_sds(data.y), data.n(), data.lags);
  auto model = std::make_shared<SteadyStateBvarModel>(data, prior, omega);
  return std::make_unique<IncrementalChibEstimator>(
      std::move(model), options.burn, options.order, options.se);
}

}  // namespace boop
