#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boop/acquisition.hpp"
#include "boop/evaluator.hpp"

namespace boop {

struct BoopConfig {
  Box bounds;
  double alpha = 1e-3;
  long g_min = 3000;
  long batch = 200;
  long g_max = 10000;
  long iterations = 150;  // total evaluations, initial draws included
  int j0 = 2;             // random full-precision evaluations up front
  std::uint64_t seed = 1;

  // Inner-loop controls (not part of the run protocol).
  int acquisition_restarts = 6;
  int fit_starts = 8;
  int fit_iterations = 120;

  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  Eigen::VectorXd x;
  double f_hat = 0.0;
  double se = 0.0;
  long g_used = 0;
  bool stopped_early = false;
  double f_max = 0.0;  // incumbent after this evaluation
  long cum_draws = 0;
  Eigen::VectorXd z;            // effort covariates at selection time
  bool fallback_random = false; // acquisition machinery failed, x was random
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  std::vector<std::pair<int, double>> incumbent_path;
  long total_draws = 0;

  double current_f_max() const;
};

// Applies the incumbent rule to a finished evaluation and appends to the
// incumbent path; returns the updated f_max.
double incumbent_update(OptimizationTrace& trace,
                        const EvaluationOutcome& outcome);

using ObjectiveFactory =
    std::function<std::unique_ptr<PrecisionEstimator>(const Eigen::VectorXd&)>;

struct OptimizationResult {
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  OptimizationTrace trace;
};

// Precision-optimized Bayesian optimization: each round refits the
// heteroscedastic surrogate and the effort model, maximizes EI divided by
// the predicted draw count, and evaluates with early stopping.
OptimizationResult boop_optimize(const ObjectiveFactory& objective_factory,
                                 const BoopConfig& cfg, RngStream& rng);

// Plain expected-improvement baseline; every evaluation runs the full draw
// budget.
OptimizationResult bo_ei_optimize(const ObjectiveFactory& objective_factory,
                                  const BoopConfig& cfg, RngStream& rng);

struct GridSpec {
  struct Dim {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
  };
  std::vector<Dim> dims;

  std::vector<std::vector<double>> axis_values() const;
  void validate() const;
};

struct GridRow {
  Eigen::VectorXd x;
  double f_hat = 0.0;
  double se = 0.0;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::optional<std::size_t> argmax;  // empty when every row failed
};

// Full Cartesian sweep; a failing objective yields a NaN row and the sweep
// continues.
GridResult grid_search(
    const std::function<std::pair<double, double>(const Eigen::VectorXd&)>&
        objective,
    const GridSpec& grid);

// Newline-delimited trace records:
// iter,<dims...>,f_hat,se,g_used,stopped_early,f_max,cum_draws
void write_trace_csv(std::ostream& out, const OptimizationTrace& trace,
                     const std::vector<std::string>& dim_names);

struct TraceTable {
  std::vector<std::string> dim_names;
  std::vector<TraceRecord> records;
};

TraceTable read_trace_csv(std::istream& in);

}  // namespace boop
