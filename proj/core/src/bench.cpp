#include "boop/bench.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "boop/errors.hpp"
#include "boop/stats.hpp"

namespace boop {

SimulatedMcmcEstimator::SimulatedMcmcEstimator(double true_value,
                                               double noise_sd, double iact)
    : true_value_(true_value), noise_sd_(noise_sd), iact_(iact) {
  if (noise_sd < 0.0 || iact < 1.0) {
    throw NumericalError("SimulatedMcmcEstimator: bad noise model");
  }
  rho_ = (iact - 1.0) / (iact + 1.0);
}

PrecisionEstimator::Checkpoint SimulatedMcmcEstimator::extend(long draws,
                                                              RngStream& rng) {
  if (draws < 1) {
    throw NumericalError("SimulatedMcmcEstimator: draws must be >= 1");
  }
  const double innovation_sd = noise_sd_ * std::sqrt(1.0 - rho_ * rho_);
  for (long i = 0; i < draws; ++i) {
    if (draws_ == 0) {
      state_ = true_value_ + noise_sd_ * rng.normal();  // stationary start
    } else {
      state_ = true_value_ + rho_ * (state_ - true_value_) +
               innovation_sd * rng.normal();
    }
    sum_ += state_;
    ++draws_;
  }
  Checkpoint cp;
  cp.f_hat = sum_ / static_cast<double>(draws_);
  cp.se = noise_sd_ * std::sqrt(iact_ / static_cast<double>(draws_));
  return cp;
}

std::unique_ptr<PrecisionEstimator> simulated_mcmc_estimator(
    const SyntheticObjective& objective, const Eigen::VectorXd& x) {
  const double iact = std::max(1.0, objective.iact_profile(x));
  return std::make_unique<SimulatedMcmcEstimator>(
      objective.true_function(x), objective.noise_sd_at_unit_g, iact);
}

namespace {

double bench_surface(const Eigen::VectorXd& x) {
  const double d1 = (x[0] - 0.8) * (x[0] - 0.8) + (x[1] - 0.3) * (x[1] - 0.3);
  const double d2 = (x[0] - 0.2) * (x[0] - 0.2) + (x[1] - 0.7) * (x[1] - 0.7);
  const double ridge = (x[0] - 0.5) * (x[0] - 0.5);
  return 2.0 * std::exp(-8.0 * d1) + 1.4 * std::exp(-10.0 * d2) +
         0.3 * std::exp(-20.0 * ridge);
}

}  // namespace

SyntheticObjective standard_bench_objective(double noise_sd) {
  SyntheticObjective obj;
  obj.true_function = bench_surface;
  obj.noise_sd_at_unit_g = noise_sd;
  // Chains mix worse toward larger x1: costlier to certify a point there.
  obj.iact_profile = [](const Eigen::VectorXd& x) {
    return 1.0 + 9.0 * std::clamp(x[0], 0.0, 1.0);
  };
  return obj;
}

Box standard_bench_bounds() {
  Box b;
  b.lo = Eigen::Vector2d(0.0, 0.0);
  b.hi = Eigen::Vector2d(1.0, 1.0);
  return b;
}

std::pair<Eigen::VectorXd, double> standard_bench_optimum() {
  Eigen::Vector2d best(0.0, 0.0);
  double f_best = -1e300;
  const int grid = 400;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      Eigen::Vector2d x(static_cast<double>(i) / grid,
                        static_cast<double>(j) / grid);
      const double f = bench_surface(x);
      if (f > f_best) {
        f_best = f;
        best = x;
      }
    }
  }
  // Coordinate refinement around the grid winner.
  double h = 1.0 / grid;
  for (int round = 0; round < 40; ++round) {
    bool improved = false;
    for (int d = 0; d < 2; ++d) {
      for (double dir : {-1.0, 1.0}) {
        Eigen::Vector2d x = best;
        x[d] = std::clamp(x[d] + dir * h, 0.0, 1.0);
        const double f = bench_surface(x);
        if (f > f_best) {
          f_best = f;
          best = x;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return {best, f_best};
}

CompareReport compare_strategies(const SyntheticObjective& objective,
                                 const BoopConfig& cfg,
                                 const std::vector<std::string>& strategies,
                                 const std::vector<std::uint64_t>& seeds,
                                 double gap_fraction) {
  if (strategies.empty() || seeds.empty()) {
    throw ConfigError("compare_strategies: need strategies and seeds");
  }

  CompareReport report;
  report.gap_fraction = gap_fraction;
  // Optimum of the surface under study over the configured box (fine grid;
  // the bench surfaces are smooth and low-dimensional).
  {
    double f_best = -1e300;
    const int grid = 200;
    Eigen::VectorXd x(cfg.bounds.dim());
    std::function<void(int)> sweep = [&](int dim) {
      if (dim == cfg.bounds.dim()) {
        f_best = std::max(f_best, objective.true_function(x));
        return;
      }
      for (int i = 0; i <= grid; ++i) {
        x[dim] = cfg.bounds.lo[dim] +
                 (cfg.bounds.hi[dim] - cfg.bounds.lo[dim]) * i / grid;
        sweep(dim + 1);
      }
    };
    sweep(0);
    report.true_max = f_best;
  }

  ObjectiveFactory factory = [&](const Eigen::VectorXd& x) {
    return simulated_mcmc_estimator(objective, x);
  };

  for (const auto& strategy : strategies) {
    for (const std::uint64_t seed : seeds) {
      RngStream rng(seed);
      BoopConfig run_cfg = cfg;
      run_cfg.seed = seed;
      const OptimizationResult res =
          strategy == "boop" ? boop_optimize(factory, run_cfg, rng)
                             : bo_ei_optimize(factory, run_cfg, rng);

      StrategyRun run;
      run.strategy = strategy;
      run.seed = seed;
      run.total_draws = res.trace.total_draws;
      run.final_incumbent = res.trace.current_f_max();
      run.f_start = res.trace.records[cfg.j0 - 1].f_max;

      const double target =
          run.f_start + gap_fraction * (report.true_max - run.f_start);
      run.draws_to_target = res.trace.total_draws;
      for (const auto& r : res.trace.records) {
        run.points.push_back({r.iter, r.cum_draws, r.f_max});
        if (!run.reached_target && r.f_max >= target) {
          run.draws_to_target = r.cum_draws;
          run.reached_target = true;
        }
      }
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

void write_compare_curves_csv(std::ostream& out, const CompareReport& report) {
  out << "strategy,seed,iter,cum_draws,incumbent\n";
  for (const auto& run : report.runs) {
    for (const auto& p : run.points) {
      out << run.strategy << ',' << run.seed << ',' << p.iter << ','
          << p.cum_draws << ',';
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", p.incumbent);
      out << buf << '\n';
    }
  }
}

void write_compare_summary_csv(std::ostream& out, const CompareReport& report) {
  out << "strategy,seed,f_start,final_incumbent,total_draws,draws_to_target,"
         "reached_target\n";
  for (const auto& run : report.runs) {
    char buf[40];
    out << run.strategy << ',' << run.seed << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", run.f_start);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", run.final_incumbent);
    out << buf << ',' << run.total_draws << ',' << run.draws_to_target << ','
        << (run.reached_target ? 1 : 0) << '\n';
  }
}

}  // namespace boop
