#include "boop/driver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "boop/effort.hpp"
#include "boop/stats.hpp"

namespace boop {

void BoopConfig::validate() const {
  bounds.validate();
  if (!(alpha >= 0.0) || !(alpha < 1.0)) {
    throw ConfigError("BoopConfig: alpha must be in [0, 1)");
  }
  if (g_min < 1 || batch < 1 || g_max < g_min) {
    throw ConfigError("BoopConfig: bad draw budget");
  }
  if (j0 < 2) throw ConfigError("BoopConfig: j0 must be >= 2");
  if (iterations < j0) {
    throw ConfigError("BoopConfig: iterations must be >= j0");
  }
}

double OptimizationTrace::current_f_max() const {
  return incumbent_path.empty() ? -std::numeric_limits<double>::infinity()
                                : incumbent_path.back().second;
}

double incumbent_update(OptimizationTrace& trace,
                        const EvaluationOutcome& outcome) {
  double f_max = trace.current_f_max();
  // Full-budget results always compete; early-stopped ones only displace the
  // incumbent when their point estimate actually exceeds it.
  if (!outcome.stopped_early || outcome.f_hat > f_max) {
    f_max = std::max(f_max, outcome.f_hat);
  }
  trace.incumbent_path.emplace_back(
      static_cast<int>(trace.records.size()) + 1, f_max);
  return f_max;
}

namespace {

Eigen::VectorXd random_point(const Box& bounds, RngStream& rng) {
  Eigen::VectorXd x(bounds.dim());
  for (Eigen::Index i = 0; i < bounds.dim(); ++i) {
    x[i] = rng.uniform(bounds.lo[i], bounds.hi[i]);
  }
  return x;
}

struct SurrogateInputs {
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  std::vector<double> ses;
};

GpModel fit_surrogate(const SurrogateInputs& data, const Box& bounds,
                      const BoopConfig& cfg, RngStream& rng) {
  InputScaler scaler(bounds.lo, bounds.hi);
  TrainingSet train;
  for (std::size_t i = 0; i < data.xs.size(); ++i) {
    train.add(scaler.apply(data.xs[i]), data.fs[i],
              data.ses[i] * data.ses[i]);
  }
  const double prior_mean = mean_of(train.observations);
  const double sd_y = std::max(sd_of(train.observations), 1e-8);

  KernelFitBounds fit_bounds;
  fit_bounds.sigma_f_lo = sd_y * 1e-3;
  fit_bounds.sigma_f_hi = sd_y * 1e3;
  fit_bounds.ell_lo = 0.05;
  fit_bounds.ell_hi = 20.0;
  KernelFitOptions options;
  options.starts = cfg.fit_starts;
  options.max_iterations = cfg.fit_iterations;
  const KernelFitResult fit = gp_fit_hyperparams(
      train, KernelFamily::Matern52, fit_bounds, rng, options, prior_mean);
  return GpModel(fit.spec, std::move(train), prior_mean, scaler);
}

Eigen::VectorXd incumbent_location(const SurrogateInputs& data) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < data.xs.size(); ++i) {
    if (data.fs[i] > data.fs[best]) best = i;
  }
  return data.xs[best];
}

enum class Strategy { Boop, BoEi };

OptimizationResult optimize_loop(const ObjectiveFactory& objective_factory,
                                 const BoopConfig& cfg, RngStream& rng,
                                 Strategy strategy) {
  cfg.validate();

  OptimizationResult result;
  OptimizationTrace& trace = result.trace;
  SurrogateInputs data;
  std::vector<EffortRecord> effort_records;

  auto record_outcome = [&](const EvaluationOutcome& outcome,
                            const Eigen::VectorXd& z, bool fallback) {
    data.xs.push_back(outcome.x);
    data.fs.push_back(outcome.f_hat);
    data.ses.push_back(outcome.se);
    const double f_max = incumbent_update(trace, outcome);
    trace.total_draws += outcome.g_used;

    TraceRecord rec;
    rec.iter = static_cast<int>(trace.records.size()) + 1;
    rec.x = outcome.x;
    rec.f_hat = outcome.f_hat;
    rec.se = outcome.se;
    rec.g_used = outcome.g_used;
    rec.stopped_early = outcome.stopped_early;
    rec.f_max = f_max;
    rec.cum_draws = trace.total_draws;
    rec.z = z;
    rec.fallback_random = fallback;
    trace.records.push_back(std::move(rec));
  };

  // Initialization: j0 random points at the full draw budget.
  for (int j = 0; j < cfg.j0; ++j) {
    const Eigen::VectorXd x = random_point(cfg.bounds, rng);
    auto estimator = objective_factory(x);
    const auto cp = estimator->extend(cfg.g_max, rng);
    EvaluationOutcome outcome;
    outcome.x = x;
    outcome.f_hat = cp.f_hat;
    outcome.se = cp.se;
    outcome.g_used = estimator->draws_used();
    outcome.stopped_early = false;
    outcome.pi_at_stop = 1.0;
    record_outcome(outcome, Eigen::VectorXd(), false);
  }

  for (long iter = cfg.j0; iter < cfg.iterations; ++iter) {
    const double f_max = trace.current_f_max();

    Eigen::VectorXd x_next;
    Eigen::VectorXd z_next;
    bool fallback = false;
    std::optional<GpModel> surrogate;
    try {
      surrogate.emplace(fit_surrogate(data, cfg.bounds, cfg, rng));

      std::optional<EffortModel> effort;
      if (strategy == Strategy::Boop && effort_records.size() >= 3) {
        EffortFitOptions effort_options;
        effort_options.g_min = static_cast<double>(cfg.g_min);
        effort_options.g_max = static_cast<double>(cfg.g_max);
        effort_options.starts = cfg.fit_starts;
        effort_options.max_iterations = cfg.fit_iterations;
        effort = effort_fit(effort_records, effort_options, rng);
      }

      AcquisitionContext ctx;
      ctx.surrogate = &*surrogate;
      ctx.effort = effort ? &*effort : nullptr;
      ctx.f_max = f_max;
      ctx.g_min = static_cast<double>(cfg.g_min);
      ctx.g_max = static_cast<double>(cfg.g_max);

      std::function<double(const Eigen::VectorXd&)> acq;
      if (strategy == Strategy::Boop) {
        acq = [&ctx](const Eigen::VectorXd& x) {
          return boop_acquisition(x, ctx);
        };
      } else {
        acq = [&ctx](const Eigen::VectorXd& x) {
          const GpPosteriorPoint post = ctx.surrogate->posterior(x);
          return expected_improvement(post.mean, post.sd, ctx.f_max);
        };
      }

      x_next = optimize_acquisition(acq, cfg.bounds,
                                    cfg.acquisition_restarts, rng,
                                    {incumbent_location(data)});
      z_next = build_covariates(x_next, surrogate->posterior(x_next), f_max)
                   .stacked();
    } catch (const NumericalError&) {
      x_next = random_point(cfg.bounds, rng);
      z_next = Eigen::VectorXd();
      fallback = true;
      if (!surrogate) {
        // Surrogate fit failed outright; condition on the records with a
        // default kernel so the evaluation can still early-stop.
        InputScaler scaler(cfg.bounds.lo, cfg.bounds.hi);
        TrainingSet train;
        for (std::size_t i = 0; i < data.xs.size(); ++i) {
          train.add(scaler.apply(data.xs[i]), data.fs[i],
                    data.ses[i] * data.ses[i]);
        }
        surrogate.emplace(KernelSpec{}, std::move(train),
                          mean_of(data.fs), scaler);
      }
    }

    auto estimator = objective_factory(x_next);
    EarlyStopConfig stop;
    stop.alpha = strategy == Strategy::Boop ? cfg.alpha : 0.0;
    stop.g_min = strategy == Strategy::Boop ? cfg.g_min : cfg.g_max;
    stop.batch = cfg.batch;
    stop.g_max = cfg.g_max;
    const EvaluationOutcome outcome = evaluate_with_early_stopping(
        *estimator, x_next, *surrogate, f_max, stop, rng);

    if (strategy == Strategy::Boop && z_next.size() > 0) {
      effort_records.push_back(
          {z_next, std::log(static_cast<double>(outcome.g_used))});
    }
    record_outcome(outcome, z_next, fallback);
  }

  // Report the evaluation whose estimate set the final incumbent.
  std::size_t best = 0;
  double f_best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.f_hat > f_best && r.f_max == r.f_hat) {
      f_best = r.f_hat;
      best = i;
    }
  }
  result.best_x = trace.records[best].x;
  result.best_f = trace.records[best].f_hat;
  return result;
}

}  // namespace

OptimizationResult boop_optimize(const ObjectiveFactory& objective_factory,
                                 const BoopConfig& cfg, RngStream& rng) {
  return optimize_loop(objective_factory, cfg, rng, Strategy::Boop);
}

OptimizationResult bo_ei_optimize(const ObjectiveFactory& objective_factory,
                                  const BoopConfig& cfg, RngStream& rng) {
  return optimize_loop(objective_factory, cfg, rng, Strategy::BoEi);
}

void GridSpec::validate() const {
  if (dims.empty()) throw ConfigError("GridSpec: no dimensions");
  for (const auto& d : dims) {
    if (!(d.step > 0.0) || d.hi < d.lo) {
      throw ConfigError("GridSpec: need step > 0 and hi >= lo");
    }
  }
}

std::vector<std::vector<double>> GridSpec::axis_values() const {
  validate();
  std::vector<std::vector<double>> axes;
  for (const auto& d : dims) {
    std::vector<double> v;
    for (double t = d.lo; t <= d.hi + 0.5 * d.step; t += d.step) {
      v.push_back(t);
    }
    axes.push_back(std::move(v));
  }
  return axes;
}

GridResult grid_search(
    const std::function<std::pair<double, double>(const Eigen::VectorXd&)>&
        objective,
    const GridSpec& grid) {
  const auto axes = grid.axis_values();
  const std::size_t d = axes.size();

  GridResult result;
  std::vector<std::size_t> idx(d, 0);
  for (;;) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x[static_cast<Eigen::Index>(i)] = axes[i][idx[i]];

    GridRow row;
    row.x = x;
    try {
      const auto [f, se] = objective(x);
      row.f_hat = f;
      row.se = se;
    } catch (const std::exception&) {
      row.f_hat = std::numeric_limits<double>::quiet_NaN();
      row.se = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isfinite(row.f_hat) &&
        (!result.argmax.has_value() ||
         row.f_hat > result.rows[*result.argmax].f_hat)) {
      result.argmax = result.rows.size();
    }
    result.rows.push_back(std::move(row));

    // Odometer increment, last dimension fastest.
    std::size_t pos = d;
    bool done = true;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < axes[pos].size()) {
        done = false;
        break;
      }
      idx[pos] = 0;
    }
    if (done) return result;
  }
}

namespace {

void write_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace,
                     const std::vector<std::string>& dim_names) {
  out << "iter";
  for (const auto& name : dim_names) out << ',' << name;
  out << ",f_hat,se,g_used,stopped_early,f_max,cum_draws\n";
  for (const auto& r : trace.records) {
    out << r.iter;
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      out << ',';
      write_double(out, r.x[i]);
    }
    out << ',';
    write_double(out, r.f_hat);
    out << ',';
    write_double(out, r.se);
    out << ',' << r.g_used << ',' << (r.stopped_early ? 1 : 0) << ',';
    write_double(out, r.f_max);
    out << ',' << r.cum_draws << '\n';
  }
}

TraceTable read_trace_csv(std::istream& in) {
  TraceTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("trace: empty file");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 7 || header.front() != "iter" ||
      header.back() != "cum_draws") {
    throw DataError("trace: unexpected header");
  }
  const std::size_t dims = header.size() - 7;
  for (std::size_t i = 0; i < dims; ++i) {
    table.dim_names.push_back(header[1 + i]);
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw DataError("trace: ragged row at line " + std::to_string(line_no));
    }
    TraceRecord r;
    try {
      r.iter = std::stoi(cells[0]);
      r.x.resize(static_cast<Eigen::Index>(dims));
      for (std::size_t i = 0; i < dims; ++i) {
        r.x[static_cast<Eigen::Index>(i)] = std::stod(cells[1 + i]);
      }
      r.f_hat = std::stod(cells[1 + dims]);
      r.se = std::stod(cells[2 + dims]);
      r.g_used = std::stol(cells[3 + dims]);
      r.stopped_early = cells[4 + dims] != "0";
      r.f_max = std::stod(cells[5 + dims]);
      r.cum_draws = std::stol(cells[6 + dims]);
    } catch (const std::exception&) {
      throw DataError("trace: bad value at line " + std::to_string(line_no));
    }
    table.records.push_back(std::move(r));
  }
  return table;
}

}  // namespace boop
