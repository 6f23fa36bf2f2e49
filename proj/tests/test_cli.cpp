#include "boop/commands.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "boop/rng.hpp"

using namespace boop;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  const auto dir = fs::temp_directory_path() / "boop_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

std::string bench_config_json() {
  return R"({
  "objective": "bench",
  "seed": 7,
  "optimizer": {"strategy": "boop", "alpha": 0.001, "g_min": 100,
                "burn": 0, "batch": 100, "g_max": 400,
                "iterations": 5, "j0": 2},
  "bench": {"noise_sd": 2.0}
})";
}

// Two-variable synthetic dataset plus a matching run configuration.
std::string bvar_csv() {
  RngStream rng(99);
  std::ostringstream out;
  out << "gdp,rate\n";
  double a = 0.2, b = -0.1;
  for (int t = 0; t < 50; ++t) {
    const double a_next = 1.0 + 0.6 * (a - 1.0) + 0.5 * rng.normal();
    const double b_next = 2.0 + 0.4 * (b - 2.0) + 0.4 * rng.normal();
    a = a_next;
    b = b_next;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", a, b);
    out << buf;
  }
  return out.str();
}

std::string bvar_config_json(const std::string& csv_path) {
  std::ostringstream out;
  out << R"({
  "objective": "bvar",
  "seed": 3,
  "optimizer": {"strategy": "boop", "alpha": 0.001, "g_min": 300,
                "burn": 250, "batch": 100, "g_max": 600,
                "iterations": 3, "j0": 2},
  "bvar": {
    "lags": 1,
    "pi_mean": [0.4, 0.0, 0.0, 0.4],
    "psi_mean": [1.0, 2.0],
    "psi_sd": [0.5, 0.5]
  },
  "grid": [{"lo": 0.1, "hi": 0.3, "step": 0.2},
           {"lo": 0.3, "hi": 0.7, "step": 0.4},
           {"lo": 0.5, "hi": 1.5, "step": 1.0}],
  "data": {"path": ")"
      << csv_path << R"(",
           "series": [{"name": "gdp", "transform": "none", "frequency": "Q"},
                      {"name": "rate", "transform": "none", "frequency": "Q"}]}
})";
  return out.str();
}

}  // namespace

TEST_CASE("config loading: defaults, overrides, and rejection of typos") {
  const auto dir = scratch_root() / "config";
  const std::string path =
      write_file(dir / "run.json", bench_config_json());

  const RunConfig cfg = load_run_config(path, Command::Optimize);
  CHECK(cfg.objective == "bench");
  CHECK(cfg.seed == 7);
  CHECK(cfg.optimizer.g_min == 100);
  CHECK(cfg.optimizer.iterations == 5);
  CHECK(cfg.bounds.dim() == 2);  // bench default bounds

  CliOverrides overrides;
  overrides.seed = 123;
  overrides.strategy = "bo-ei";
  const RunConfig cfg2 = load_run_config(path, Command::Optimize, overrides);
  CHECK(cfg2.seed == 123);
  CHECK(cfg2.optimizer.strategy == "bo-ei");

  const std::string typo = write_file(
      dir / "typo.json", R"({"objective": "bench", "optimzer": {}})");
  CHECK_THROWS_AS(load_run_config(typo, Command::Optimize), ConfigError);

  const std::string bad_type = write_file(
      dir / "bad_type.json", R"({"objective": "bench", "seed": "high"})");
  CHECK_THROWS_AS(load_run_config(bad_type, Command::Optimize), ConfigError);

  const std::string bad_json =
      write_file(dir / "bad.json", "{not json at all");
  CHECK_THROWS_AS(load_run_config(bad_json, Command::Optimize), ConfigError);

  CHECK_THROWS_AS(load_run_config("/nonexistent.json", Command::Optimize),
                  ConfigError);

  // Defaults mandated by the run protocol.
  const std::string minimal =
      write_file(dir / "minimal.json", R"({"objective": "bench"})");
  const RunConfig defaults = load_run_config(minimal, Command::Optimize);
  CHECK(defaults.optimizer.alpha == doctest::Approx(0.001));
  CHECK(defaults.optimizer.g_min == 3000);
  CHECK(defaults.optimizer.burn == 2500);
  CHECK(defaults.optimizer.batch == 200);
  CHECK(defaults.optimizer.g_max == 10000);
  CHECK(defaults.optimizer.iterations == 150);
  CHECK(defaults.optimizer.j0 == 2);
}

TEST_CASE("optimize on the synthetic objective writes trace and manifest") {
  const auto dir = scratch_root() / "optimize_bench";
  fs::remove_all(dir);
  const std::string config =
      write_file(dir / "run.json", bench_config_json());

  CliOverrides overrides;
  overrides.out_dir = (dir / "out").string();
  RunConfig cfg = load_run_config(config, Command::Optimize, overrides);
  CHECK(run_command(cfg) == 0);

  const std::string trace = read_file(dir / "out" / "trace.csv");
  // Header plus j0 + iterations rows.
  CHECK(count_lines(trace) == 1 + 2 + 5);
  CHECK(trace.rfind("iter,x1,x2,f_hat,se,g_used,stopped_early,f_max,cum_draws",
                    0) == 0);

  const std::string manifest = read_file(dir / "out" / "manifest.json");
  CHECK(manifest.find("\"command\": \"optimize\"") != std::string::npos);
  CHECK(manifest.find("config_hash_fnv1a64") != std::string::npos);
  CHECK(manifest.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("optimize and grid on a synthetic two-variable dataset") {
  const auto dir = scratch_root() / "bvar_run";
  fs::remove_all(dir);
  const std::string csv = write_file(dir / "data.csv", bvar_csv());
  const std::string config =
      write_file(dir / "run.json", bvar_config_json(csv));

  CliOverrides overrides;
  overrides.out_dir = (dir / "out").string();

  RunConfig cfg = load_run_config(config, Command::Optimize, overrides);
  CHECK(run_command(cfg) == 0);
  const std::string trace = read_file(dir / "out" / "trace.csv");
  CHECK(count_lines(trace) == 1 + 2 + 3);
  CHECK(trace.rfind("iter,lambda1,lambda2,lambda3,", 0) == 0);

  RunConfig grid_cfg = load_run_config(config, Command::Grid, overrides);
  CHECK(run_command(grid_cfg) == 0);
  const std::string grid = read_file(dir / "out" / "grid.csv");
  CHECK(count_lines(grid) == 1 + 8);  // 2 x 2 x 2 specification
  CHECK(grid.rfind("lambda1,lambda2,lambda3,f_hat,se", 0) == 0);

  // Surface export from the trace written above.
  const std::string surface_config = write_file(dir / "surface.json", R"({
    "objective": "bvar",
    "seed": 3,
    "bvar": {"lags": 1, "pi_mean": [0.4, 0.0, 0.0, 0.4],
             "psi_mean": [1.0, 2.0], "psi_sd": [0.5, 0.5]},
    "surface": {"trace": ")" + (dir / "out" / "trace.csv").string() + R"(",
                "lambda3": 1.0,
                "grid": [{"lo": 0.1, "hi": 0.5, "step": 0.2},
                         {"lo": 0.2, "hi": 0.8, "step": 0.3}]}
  })");
  RunConfig surf_cfg =
      load_run_config(surface_config, Command::SurfaceExport, overrides);
  CHECK(run_command(surf_cfg) == 0);
  const std::string surface = read_file(dir / "out" / "surface.csv");
  CHECK(surface.rfind("lambda1,lambda2,lambda3,post_mean,post_sd", 0) == 0);
  CHECK(count_lines(surface) == 1 + 3 * 3);
}

TEST_CASE("chib-validate passes on the bundled models") {
  const auto dir = scratch_root() / "chib_validate";
  fs::remove_all(dir);
  const std::string config = write_file(dir / "run.json", R"({"seed": 5})");
  CliOverrides overrides;
  overrides.out_dir = (dir / "out").string();
  RunConfig cfg = load_run_config(config, Command::ChibValidate, overrides);
  CHECK(run_command(cfg) == 0);
  const std::string report = read_file(dir / "out" / "chib_validate.txt");
  CHECK(report.find("PASS") != std::string::npos);
  CHECK(report.find("FAIL") == std::string::npos);
}

TEST_CASE("reruns with the same config are byte-identical") {
  const auto dir = scratch_root() / "determinism";
  fs::remove_all(dir);
  const std::string config =
      write_file(dir / "run.json", bench_config_json());

  for (const char* out : {"a", "b"}) {
    CliOverrides overrides;
    overrides.out_dir = (dir / out).string();
    RunConfig cfg = load_run_config(config, Command::Optimize, overrides);
    run_command(cfg);
  }
  CHECK(read_file(dir / "a" / "trace.csv") ==
        read_file(dir / "b" / "trace.csv"));
  CHECK(read_file(dir / "a" / "manifest.json") ==
        read_file(dir / "b" / "manifest.json"));
}

TEST_CASE("the binary maps error categories onto exit codes") {
  const auto dir = scratch_root() / "exit_codes";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = BOOP_CLI_PATH;

  auto run = [&](const std::string& args) {
    const std::string cmd =
        cli + " " + args + " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // Config problems: missing file, malformed JSON, unknown flag value.
  CHECK(run("optimize --config " + (dir / "none.json").string()) == 2);
  const std::string bad = write_file(dir / "bad.json", "{oops");
  CHECK(run("optimize --config " + bad) == 2);
  CHECK(run("optimize") == 2);  // missing required --config

  // Data problem: the configured CSV does not exist.
  const std::string cfg = write_file(dir / "bvar.json", bvar_config_json(
      (dir / "missing.csv").string()));
  CHECK(run("optimize --config " + cfg + " --out " + (dir / "o").string()) ==
        4);

  // Success path.
  const std::string ok = write_file(dir / "ok.json", bench_config_json());
  CHECK(run("optimize --config " + ok + " --iterations 2 --out " +
            (dir / "ok_out").string()) == 0);
}
