#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "boop/commands.hpp"
#include "boop/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitData = 4;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<long> iterations;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Path to the JSON run config")
      ->required();
  cmd->add_option("--seed", flags.seed, "Override the config seed");
  cmd->add_option("--out", flags.out, "Output directory (default: .)");
  cmd->add_option("--data", flags.data, "Override the input data path");
}

int dispatch(boop::Command command, const CommonFlags& flags) {
  boop::CliOverrides overrides;
  overrides.seed = flags.seed;
  overrides.strategy = flags.strategy;
  overrides.data_path = flags.data;
  overrides.out_dir = flags.out;

  boop::RunConfig cfg = boop::load_run_config(flags.config, command, overrides);
  if (flags.iterations) {
    if (*flags.iterations < 0) {
      throw boop::ConfigError("--iterations must be non-negative");
    }
    cfg.optimizer.iterations = *flags.iterations;
  }
  return boop::run_command(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Precision-aware Bayesian optimization of MCMC-estimated "
               "objectives"};
  app.require_subcommand(1);

  CommonFlags optimize_flags, grid_flags, benchmark_flags, validate_flags,
      surface_flags;

  auto* optimize = app.add_subcommand(
      "optimize", "Run the optimizer (boop or bo-ei) and write a trace");
  add_common_flags(optimize, optimize_flags);
  optimize->add_option("--strategy", optimize_flags.strategy,
                       "boop or bo-ei (overrides config)")
      ->check(CLI::IsMember({"boop", "bo-ei"}));
  optimize->add_option("--iterations", optimize_flags.iterations,
                       "Acquisition-driven evaluations after initialization");

  auto* grid = app.add_subcommand("grid", "Exhaustive grid evaluation");
  add_common_flags(grid, grid_flags);

  auto* benchmark = app.add_subcommand(
      "benchmark", "Strategy comparison on the synthetic objective");
  add_common_flags(benchmark, benchmark_flags);

  auto* validate = app.add_subcommand(
      "chib-validate", "Closed-form checks of the marginal likelihood "
                       "estimator");
  add_common_flags(validate, validate_flags);

  auto* surface = app.add_subcommand(
      "surface-export", "Posterior-mean surface over (lambda1, lambda2)");
  add_common_flags(surface, surface_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (optimize->parsed()) {
      return dispatch(boop::Command::Optimize, optimize_flags);
    }
    if (grid->parsed()) return dispatch(boop::Command::Grid, grid_flags);
    if (benchmark->parsed()) {
      return dispatch(boop::Command::Benchmark, benchmark_flags);
    }
    if (validate->parsed()) {
      return dispatch(boop::Command::ChibValidate, validate_flags);
    }
    if (surface->parsed()) {
      return dispatch(boop::Command::SurfaceExport, surface_flags);
    }
  } catch (const boop::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const boop::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
