#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "boop/bvar.hpp"
#include "boop/data.hpp"
#include "boop/driver.hpp"

namespace boop {

inline constexpr const char* kArtifactVersion = "boop 0.1.0";

enum class Command { Optimize, Grid, Benchmark, ChibValidate, SurfaceExport };

Command command_from_string(const std::string& name);

struct OptimizerSettings {
  std::string strategy = "boop";  // or "bo-ei"
  double alpha = 0.001;
  long g_min = 3000;
  long burn = 2500;
  long batch = 200;
  long g_max = 10000;
  long iterations = 150;  // acquisition-driven evaluations after the j0 seeds
  int j0 = 2;
};

struct BvarSettings {
  int lags = 2;
  Eigen::VectorXd pi_mean;   // n^2 * lags, equation-major
  Eigen::VectorXd psi_mean;  // n (intercept-only deterministic term)
  Eigen::VectorXd psi_sd;
  ShrinkageParams lambda;    // used by grid rows and fixed-value evaluation
  OwnLagVariance own_lag_variance = OwnLagVariance::LagDecayOnly;
  bool se_aic_selection = true;
  int se_fixed_q = 10;
};

struct BenchSettings {
  double noise_sd = 3.0;
};

struct BenchmarkSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> strategies = {"boop", "bo-ei"};
  double gap_fraction = 0.9;
};

struct SurfaceSettings {
  std::string trace_path;
  double lambda3 = 1.0;
  GridSpec grid;  // two dimensions: lambda1, lambda2
};

struct RunConfig {
  Command command = Command::Optimize;
  std::string objective = "bench";  // "bench" or "bvar"
  std::uint64_t seed = 1;
  Box bounds;  // defaulted per objective when absent
  OptimizerSettings optimizer;
  BvarSettings bvar;
  BenchSettings bench;
  BenchmarkSettings benchmark;
  SurfaceSettings surface;
  GridSpec grid;
  std::string data_path;
  std::vector<SeriesSpec> series;
  std::string out_dir = ".";

  bool bounds_set = false;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> data_path;
  std::optional<std::string> out_dir;
};

// Parses and validates the JSON config; unknown keys are rejected.
RunConfig load_run_config(const std::string& path, Command command,
                          const CliOverrides& overrides = {});

// Executes the command, writing its artifacts and a manifest into the output
// directory. Returns 0; failures surface as typed exceptions, which the CLI
// maps to exit codes.
int run_command(const RunConfig& cfg);

}  // namespace boop
