#include "boop/chib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "boop/errors.hpp"
#include "boop/stats.hpp"

namespace boop {

namespace {

void gibbs_sweep(const ThreeBlockModel& model, BlockState& state,
                 RngStream& rng, int fixed_block = -1) {
  for (int b = 0; b < 3; ++b) {
    if (b == fixed_block || model.block_dim(b) == 0) continue;
    state[b] = model.sample_block(b, state, rng);
  }
}

DrawStore run_gibbs(const ThreeBlockModel& model, long iterations, long burn,
                    RngStream& rng, int fixed_block,
                    const Eigen::VectorXd* fixed_value,
                    const BlockState* start) {
  if (iterations <= burn || burn < 0) {
    throw NumericalError("run_gibbs: require iterations > burn >= 0");
  }
  BlockState state = start != nullptr ? *start : model.initial_state();
  if (fixed_block >= 0) state[fixed_block] = *fixed_value;

  DrawStore store;
  store.draws.reserve(static_cast<std::size_t>(iterations - burn));
  for (long it = 0; it < iterations; ++it) {
    try {
      gibbs_sweep(model, state, rng, fixed_block);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "Gibbs sweep failed at iteration " << it << ": " << e.what();
      throw NumericalError(msg.str());
    }
    if (it >= burn) store.draws.push_back(state);
  }
  return store;
}

// Strips the running maximum out of a log series; the result has max 1.
std::pair<std::vector<double>, double> scale_from_logs(
    const std::vector<double>& log_values) {
  if (log_values.empty()) return {{}, 0.0};
  const double m = *std::max_element(log_values.begin(), log_values.end());
  std::vector<double> out;
  out.reserve(log_values.size());
  for (double lv : log_values) out.push_back(std::exp(lv - m));
  return {std::move(out), m};
}

void check_log_density(double value, const char* series, std::size_t index) {
  if (std::isnan(value) || value == std::numeric_limits<double>::infinity()) {
    std::ostringstream msg;
    msg << "Chib ordinate " << series << " is invalid at draw " << index;
    throw NumericalError(msg.str());
  }
  if (value == -std::numeric_limits<double>::infinity()) {
    std::ostringstream msg;
    msg << "Chib ordinate " << series << " evaluated to zero density at draw "
        << index;
    throw NumericalError(msg.str());
  }
}

struct SeriesMatrix {
  Eigen::MatrixXd values;  // G x m, columns are the non-degenerate components
  std::vector<int> kept;   // original component indices
};

SeriesMatrix active_components(const HSeries& h) {
  const std::size_t g = h.h1.size();
  Eigen::VectorXd v1 = Eigen::Map<const Eigen::VectorXd>(h.h1.data(), g);
  Eigen::VectorXd v2 = Eigen::Map<const Eigen::VectorXd>(h.h2.data(), g);
  const double var1 = (v1.array() - v1.mean()).square().mean();
  const double var2 = (v2.array() - v2.mean()).square().mean();

  SeriesMatrix out;
  if (var1 > 1e-28) out.kept.push_back(0);
  if (var2 > 1e-28) out.kept.push_back(1);
  out.values.resize(static_cast<Eigen::Index>(g),
                    static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t k = 0; k < out.kept.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = out.kept[k] == 0 ? v1 : v2;
  }
  return out;
}

}  // namespace

DrawStore run_full_gibbs(const ThreeBlockModel& model, long iterations,
                         long burn, RngStream& rng) {
  return run_gibbs(model, iterations, burn, rng, -1, nullptr, nullptr);
}

DrawStore run_reduced_gibbs(const ThreeBlockModel& model, int fixed_block,
                            const Eigen::VectorXd& fixed_value,
                            long iterations, long burn, RngStream& rng,
                            const BlockState* start) {
  if (fixed_block < 0 || fixed_block > 2) {
    throw NumericalError("run_reduced_gibbs: bad block index");
  }
  return run_gibbs(model, iterations, burn, rng, fixed_block, &fixed_value,
                   start);
}

BlockState select_theta_star(const DrawStore& draws) {
  if (draws.draws.empty()) {
    throw NumericalError("select_theta_star: empty draw store");
  }
  BlockState mean;
  for (int b = 0; b < 3; ++b) {
    mean[b] = Eigen::VectorXd::Zero(draws.draws.front()[b].size());
  }
  for (const auto& d : draws.draws) {
    for (int b = 0; b < 3; ++b) mean[b] += d[b];
  }
  for (int b = 0; b < 3; ++b) {
    mean[b] /= static_cast<double>(draws.size());
  }
  return mean;
}

void BlockOrder::validate() const {
  std::array<int, 3> seen{0, 0, 0};
  for (int b : {marginal, reduced, exact}) {
    if (b < 0 || b > 2) throw NumericalError("BlockOrder: index out of range");
    seen[b] += 1;
  }
  if (seen != std::array<int, 3>{1, 1, 1}) {
    throw NumericalError("BlockOrder: roles must be a permutation of blocks");
  }
}

Eigen::Matrix2d nw_variance(const HSeries& h, int q) {
  const std::size_t g = h.h1.size();
  if (h.h2.size() != g) {
    throw NumericalError("nw_variance: series lengths differ");
  }
  if (q < 0 || static_cast<std::size_t>(q) >= g) {
    throw NumericalError("nw_variance: require series length > q >= 0");
  }
  Eigen::MatrixXd v(g, 2);
  for (std::size_t i = 0; i < g; ++i) {
    v(static_cast<Eigen::Index>(i), 0) = h.h1[i];
    v(static_cast<Eigen::Index>(i), 1) = h.h2[i];
  }
  const Eigen::RowVector2d mean = v.colwise().mean();
  v.rowwise() -= mean;

  const double inv_g = 1.0 / static_cast<double>(g);
  Eigen::Matrix2d omega0 = inv_g * (v.transpose() * v);
  Eigen::Matrix2d acc = omega0;
  for (int s = 1; s <= q; ++s) {
    const Eigen::Index rows = static_cast<Eigen::Index>(g) - s;
    const Eigen::Matrix2d omega_s =
        inv_g * (v.bottomRows(rows).transpose() * v.topRows(rows));
    const double w = 1.0 - static_cast<double>(s) / (q + 1.0);
    acc += w * (omega_s + omega_s.transpose());
  }
  return inv_g * acc;
}

QSelection select_q(const HSeries& h, int max_q) {
  const std::size_t g = h.h1.size();
  if (h.h2.size() != g) {
    throw NumericalError("select_q: series lengths differ");
  }
  if (max_q < 0) throw NumericalError("select_q: max_q must be >= 0");
  if (max_q == 0) return {0, false};
  if (g < static_cast<std::size_t>(2 * max_q + 4)) {
    throw NumericalError("select_q: series too short for requested max_q");
  }

  const SeriesMatrix series = active_components(h);
  const Eigen::Index m = series.values.cols();
  if (m == 0) return {0, false};  // both ordinates constant, no dynamics

  Eigen::MatrixXd v = series.values;
  v.rowwise() -= v.colwise().mean();

  // All candidate orders are scored on the common sample t = max_q..G-1.
  const Eigen::Index t_eff = v.rows() - max_q;
  auto aic_for = [&](int q) -> double {
    Eigen::MatrixXd resid;
    if (q == 0) {
      resid = v.bottomRows(t_eff);
    } else {
      Eigen::MatrixXd x(t_eff, m * q);
      Eigen::MatrixXd y(t_eff, m);
      for (Eigen::Index t = 0; t < t_eff; ++t) {
        y.row(t) = v.row(max_q + t);
        for (int lag = 1; lag <= q; ++lag) {
          x.block(t, (lag - 1) * m, 1, m) = v.row(max_q + t - lag);
        }
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
      if (qr.rank() < x.cols()) {
        return std::numeric_limits<double>::quiet_NaN();  // singular design
      }
      resid = y - x * qr.solve(y);
    }
    const Eigen::MatrixXd sigma =
        resid.transpose() * resid / static_cast<double>(t_eff);
    const double det = sigma.determinant();
    if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(det) +
           2.0 * q * static_cast<double>(m * m) / static_cast<double>(t_eff);
  };

  int best_q = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int q = 0; q <= max_q; ++q) {
    const double a = aic_for(q);
    if (std::isnan(a)) {
      return {std::min(10, max_q), true};
    }
    if (a < best_aic) {
      best_aic = a;
      best_q = q;
    }
  }
  if (!std::isfinite(best_aic)) return {std::min(10, max_q), true};
  return {best_q, false};
}

double delta_method_se(const Eigen::Matrix2d& var_h,
                       const Eigen::Vector2d& h_bar) {
  if (!(h_bar[0] > 0.0) || !(h_bar[1] > 0.0)) {
    throw NumericalError("delta_method_se: h_bar must be strictly positive");
  }
  const Eigen::Vector2d grad(1.0 / h_bar[0], 1.0 / h_bar[1]);
  const double quad = grad.dot(var_h * grad);
  return std::sqrt(std::max(0.0, quad));
}

namespace {

HSeries scaled_h_series(const std::vector<double>& log_h1,
                        const std::vector<double>& log_h2) {
  const std::size_t g = std::min(log_h1.size(), log_h2.size());
  HSeries h;
  auto [s1, m1] =
      scale_from_logs(std::vector<double>(log_h1.begin(), log_h1.begin() + g));
  auto [s2, m2] =
      scale_from_logs(std::vector<double>(log_h2.begin(), log_h2.begin() + g));
  h.h1 = std::move(s1);
  h.h2 = std::move(s2);
  h.log_scale1 = m1;
  h.log_scale2 = m2;
  return h;
}

double se_from_log_series(const std::vector<double>& log_h1,
                          const std::vector<double>& log_h2,
                          const SeOptions& se, int* q_out) {
  const HSeries h = scaled_h_series(log_h1, log_h2);
  const std::size_t g = h.h1.size();

  int q = 0;
  if (g > 1) {
    const int cap = std::min<int>(se.max_q, static_cast<int>(g) / 10);
    if (se.aic_selection && cap > 0 &&
        g >= static_cast<std::size_t>(2 * cap + 4)) {
      const QSelection sel = select_q(h, cap);
      q = sel.fallback ? std::min<int>(se.fixed_q, static_cast<int>(g) - 1)
                       : sel.q;
    } else {
      q = std::min<int>(se.fixed_q, static_cast<int>(g) - 1);
    }
  }
  if (q_out != nullptr) *q_out = q;

  const Eigen::Matrix2d var = nw_variance(h, q);
  const Eigen::Vector2d h_bar(mean_of(h.h1), mean_of(h.h2));
  return delta_method_se(var, h_bar);
}

}  // namespace

ChibResult chib_logml(const ThreeBlockModel& model, long g1, long g2,
                      long burn, RngStream& rng, const BlockOrder& order,
                      const SeOptions& se) {
  order.validate();

  const DrawStore full = run_full_gibbs(model, g1, burn, rng);
  const BlockState theta_star = select_theta_star(full);

  ChibComponents comp;
  comp.log_lik = model.log_likelihood(theta_star);
  comp.log_prior = model.log_prior(theta_star);

  std::vector<double> log_h1;
  log_h1.reserve(full.size());
  if (model.block_dim(order.marginal) > 0) {
    for (std::size_t i = 0; i < full.size(); ++i) {
      const double lv = model.log_block_conditional(
          order.marginal, theta_star[order.marginal], full.draws[i]);
      check_log_density(lv, "h1", i);
      log_h1.push_back(lv);
    }
  } else {
    log_h1.assign(full.size(), 0.0);
  }

  const DrawStore reduced =
      run_reduced_gibbs(model, order.marginal, theta_star[order.marginal], g2,
                        burn, rng, &theta_star);
  std::vector<double> log_h2;
  log_h2.reserve(reduced.size());
  if (model.block_dim(order.reduced) > 0) {
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      const double lv = model.log_block_conditional(
          order.reduced, theta_star[order.reduced], reduced.draws[i]);
      check_log_density(lv, "h2", i);
      log_h2.push_back(lv);
    }
  } else {
    log_h2.assign(reduced.size(), 0.0);
  }

  comp.log_post_marginal = log_mean_exp(log_h1);
  comp.log_post_reduced = log_mean_exp(log_h2);
  comp.log_post_exact =
      model.block_dim(order.exact) > 0
          ? model.log_block_conditional(order.exact, theta_star[order.exact],
                                        theta_star)
          : 0.0;
  check_log_density(comp.log_post_exact, "exact ordinate", 0);

  ChibResult out;
  out.estimate.components = comp;
  out.estimate.log_ml = comp.log_lik + comp.log_prior -
                        (comp.log_post_marginal + comp.log_post_reduced +
                         comp.log_post_exact);
  out.estimate.g1 = g1;
  out.estimate.g2 = g2;
  out.estimate.se =
      se_from_log_series(log_h1, log_h2, se, &out.estimate.q_used);
  out.h = scaled_h_series(log_h1, log_h2);
  return out;
}

IncrementalChibEstimator::IncrementalChibEstimator(
    std::shared_ptr<const ThreeBlockModel> model, long burn, BlockOrder order,
    SeOptions se)
    : model_(std::move(model)), burn_(burn), order_(order), se_(se) {
  order_.validate();
  if (burn_ < 0) throw NumericalError("IncrementalChibEstimator: burn < 0");
  full_state_ = model_->initial_state();
}

PrecisionEstimator::Checkpoint IncrementalChibEstimator::extend(
    long draws, RngStream& rng) {
  if (draws < 1) {
    throw NumericalError("IncrementalChibEstimator: draws must be >= 1");
  }

  if (!frozen_) {
    const long target = full_iterations_ + draws;
    if (target <= burn_) {
      throw NumericalError(
          "IncrementalChibEstimator: first extension must pass burn-in");
    }
    for (long it = 0; it < draws; ++it) {
      gibbs_sweep(*model_, full_state_, rng);
      ++full_iterations_;
      if (full_iterations_ > burn_) warmup_draws_.push_back(full_state_);
    }

    // Freeze the anchor at the mean of the draws seen so far, then charge
    // the warm-up draws to the h1 series and spin up the reduced chain.
    DrawStore warm;
    warm.draws = std::move(warmup_draws_);
    warmup_draws_.clear();
    theta_star_ = select_theta_star(warm);
    components_.log_lik = model_->log_likelihood(theta_star_);
    components_.log_prior = model_->log_prior(theta_star_);
    components_.log_post_exact =
        model_->block_dim(order_.exact) > 0
            ? model_->log_block_conditional(order_.exact,
                                            theta_star_[order_.exact],
                                            theta_star_)
            : 0.0;
    check_log_density(components_.log_post_exact, "exact ordinate", 0);

    const bool marginal_active = model_->block_dim(order_.marginal) > 0;
    for (std::size_t i = 0; i < warm.size(); ++i) {
      const double lv =
          marginal_active
              ? model_->log_block_conditional(
                    order_.marginal, theta_star_[order_.marginal],
                    warm.draws[i])
              : 0.0;
      check_log_density(lv, "h1", i);
      log_h1_.push_back(lv);
    }

    reduced_state_ = theta_star_;
    const bool reduced_active = model_->block_dim(order_.reduced) > 0;
    for (long it = 0; it < full_iterations_; ++it) {
      gibbs_sweep(*model_, reduced_state_, rng, order_.marginal);
      ++reduced_iterations_;
      if (reduced_iterations_ > burn_) {
        const double lv =
            reduced_active
                ? model_->log_block_conditional(
                      order_.reduced, theta_star_[order_.reduced],
                      reduced_state_)
                : 0.0;
        check_log_density(lv, "h2", log_h2_.size());
        log_h2_.push_back(lv);
      }
    }
    frozen_ = true;
    return current_estimate();
  }

  const bool marginal_active = model_->block_dim(order_.marginal) > 0;
  const bool reduced_active = model_->block_dim(order_.reduced) > 0;
  for (long it = 0; it < draws; ++it) {
    gibbs_sweep(*model_, full_state_, rng);
    ++full_iterations_;
    const double lv1 =
        marginal_active
            ? model_->log_block_conditional(
                  order_.marginal, theta_star_[order_.marginal], full_state_)
            : 0.0;
    check_log_density(lv1, "h1", log_h1_.size());
    log_h1_.push_back(lv1);

    gibbs_sweep(*model_, reduced_state_, rng, order_.marginal);
    ++reduced_iterations_;
    const double lv2 =
        reduced_active
            ? model_->log_block_conditional(
                  order_.reduced, theta_star_[order_.reduced], reduced_state_)
            : 0.0;
    check_log_density(lv2, "h2", log_h2_.size());
    log_h2_.push_back(lv2);
  }
  return current_estimate();
}

PrecisionEstimator::Checkpoint IncrementalChibEstimator::current_estimate() {
  components_.log_post_marginal = log_mean_exp(log_h1_);
  components_.log_post_reduced = log_mean_exp(log_h2_);

  Checkpoint cp;
  cp.f_hat = components_.log_lik + components_.log_prior -
             (components_.log_post_marginal + components_.log_post_reduced +
              components_.log_post_exact);
  cp.se = se_from_log_series(log_h1_, log_h2_, se_, &last_q_);
  return cp;
}

}  // namespace boop
