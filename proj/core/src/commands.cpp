#include "boop/commands.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "boop/bench.hpp"
#include "boop/stats.hpp"
#include "boop/toy_models.hpp"

namespace boop {

namespace {

using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "optimize") return Command::Optimize;
  if (name == "grid") return Command::Grid;
  if (name == "benchmark") return Command::Benchmark;
  if (name == "chib-validate") return Command::ChibValidate;
  if (name == "surface-export") return Command::SurfaceExport;
  throw ConfigError("unknown command '" + name + "'");
}

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad type for '" + key + "'");
  }
}

Eigen::VectorXd get_vector(const json& obj, const std::string& key) {
  try {
    const auto values = obj.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
  } catch (const json::exception&) {
    throw ConfigError("config: '" + key + "' must be an array of numbers");
  }
}

GridSpec parse_grid(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError("config: " + where + " must be a non-empty array");
  }
  GridSpec grid;
  for (const auto& item : arr) {
    require_keys(item, where, {"lo", "hi", "step"});
    GridSpec::Dim d;
    d.lo = get_or<double>(item, "lo", 0.0);
    d.hi = get_or<double>(item, "hi", 0.0);
    d.step = get_or<double>(item, "step", 0.0);
    grid.dims.push_back(d);
  }
  grid.validate();
  return grid;
}

Box default_bounds(const std::string& objective) {
  Box b;
  if (objective == "bvar") {
    b.lo = Eigen::Vector3d(0.01, 0.01, 0.01);
    b.hi = Eigen::Vector3d(5.0, 1.0, 5.0);
  } else {
    b = standard_bench_bounds();
  }
  return b;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json grid_to_json(const GridSpec& grid) {
  json arr = json::array();
  for (const auto& d : grid.dims) {
    arr.push_back({{"lo", d.lo}, {"hi", d.hi}, {"step", d.step}});
  }
  return arr;
}

std::string transform_to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::None: return "none";
    case TransformKind::Diff: return "diff";
    case TransformKind::DiffLog400: return "diff_log_400";
  }
  return "none";
}

json effective_config_json(const RunConfig& cfg) {
  json out;
  out["objective"] = cfg.objective;
  out["seed"] = cfg.seed;
  if (cfg.bounds_set || cfg.command == Command::Optimize ||
      cfg.command == Command::Grid) {
    out["bounds"] = {
        {"lower", std::vector<double>(cfg.bounds.lo.data(),
                                      cfg.bounds.lo.data() + cfg.bounds.lo.size())},
        {"upper", std::vector<double>(cfg.bounds.hi.data(),
                                      cfg.bounds.hi.data() + cfg.bounds.hi.size())}};
  }
  out["optimizer"] = {{"strategy", cfg.optimizer.strategy},
                      {"alpha", cfg.optimizer.alpha},
                      {"g_min", cfg.optimizer.g_min},
                      {"burn", cfg.optimizer.burn},
                      {"batch", cfg.optimizer.batch},
                      {"g_max", cfg.optimizer.g_max},
                      {"iterations", cfg.optimizer.iterations},
                      {"j0", cfg.optimizer.j0}};
  if (cfg.objective == "bvar") {
    json bvar;
    bvar["lags"] = cfg.bvar.lags;
    bvar["pi_mean"] = std::vector<double>(
        cfg.bvar.pi_mean.data(), cfg.bvar.pi_mean.data() + cfg.bvar.pi_mean.size());
    bvar["psi_mean"] = std::vector<double>(
        cfg.bvar.psi_mean.data(),
        cfg.bvar.psi_mean.data() + cfg.bvar.psi_mean.size());
    bvar["psi_sd"] = std::vector<double>(
        cfg.bvar.psi_sd.data(), cfg.bvar.psi_sd.data() + cfg.bvar.psi_sd.size());
    bvar["lambda"] = {{"lambda1", cfg.bvar.lambda.lambda1},
                      {"lambda2", cfg.bvar.lambda.lambda2},
                      {"lambda3", cfg.bvar.lambda.lambda3}};
    bvar["own_lag_variance"] =
        cfg.bvar.own_lag_variance == OwnLagVariance::LagDecayOnly
            ? "lag_decay_only"
            : "scaled_by_sd";
    bvar["se_lag_selection"] = cfg.bvar.se_aic_selection ? "aic" : "fixed";
    bvar["se_fixed_q"] = cfg.bvar.se_fixed_q;
    out["bvar"] = bvar;
  } else {
    out["bench"] = {{"noise_sd", cfg.bench.noise_sd}};
  }
  if (!cfg.series.empty()) {
    json arr = json::array();
    for (const auto& s : cfg.series) {
      arr.push_back({{"name", s.name},
                     {"transform", transform_to_string(s.transform)},
                     {"frequency",
                      s.frequency == Frequency::Monthly ? "M" : "Q"}});
    }
    out["data"] = {{"path", cfg.data_path}, {"series", arr}};
  } else if (!cfg.data_path.empty()) {
    out["data"] = {{"path", cfg.data_path}};
  }
  if (!cfg.grid.dims.empty()) out["grid"] = grid_to_json(cfg.grid);
  if (cfg.command == Command::Benchmark) {
    out["benchmark"] = {{"seeds", cfg.benchmark.seeds},
                        {"strategies", cfg.benchmark.strategies},
                        {"gap_fraction", cfg.benchmark.gap_fraction}};
  }
  if (cfg.command == Command::SurfaceExport) {
    out["surface"] = {{"trace", cfg.surface.trace_path},
                      {"lambda3", cfg.surface.lambda3},
                      {"grid", grid_to_json(cfg.surface.grid)}};
  }
  return out;
}

void write_manifest(const RunConfig& cfg, const std::string& command_name,
                    const std::vector<std::string>& outputs) {
  const json config = effective_config_json(cfg);
  const std::string canonical = config.dump();
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64,
                fnv1a_hash(canonical));

  json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = command_name;
  manifest["seed"] = cfg.seed;
  manifest["config_hash_fnv1a64"] = hash_hex;
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  manifest["monthly_aggregation"] = "quarter_mean";

  std::ofstream out(std::filesystem::path(cfg.out_dir) / "manifest.json");
  if (!out) throw DataError("cannot write manifest in '" + cfg.out_dir + "'");
  out << manifest.dump(2) << '\n';
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::ofstream out(std::filesystem::path(cfg.out_dir) / name);
  if (!out) {
    throw DataError("cannot write '" + name + "' in '" + cfg.out_dir + "'");
  }
  return out;
}

void write_double_cell(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

struct BvarObjective {
  BvarData data;
  SteadyStatePrior prior;
  BvarEstimatorOptions options;
};

BvarObjective make_bvar_objective(const RunConfig& cfg) {
  if (cfg.data_path.empty() || cfg.series.empty()) {
    throw ConfigError("bvar objective requires data.path and data.series");
  }
  std::vector<std::string> names;
  for (const auto& s : cfg.series) names.push_back(s.name);
  const RawSeriesTable table = ingest_csv(cfg.data_path, names);
  const Eigen::MatrixXd y = assemble_observation_matrix(table, cfg.series);

  BvarObjective obj{BvarData::with_intercept(y, cfg.bvar.lags),
                    SteadyStatePrior{cfg.bvar.pi_mean, cfg.bvar.psi_mean,
                                     cfg.bvar.psi_sd},
                    BvarEstimatorOptions{}};
  obj.data.validate();
  obj.prior.validate(obj.data.n(), obj.data.lags, obj.data.m());
  obj.options.burn = cfg.optimizer.burn;
  obj.options.se.aic_selection = cfg.bvar.se_aic_selection;
  obj.options.se.fixed_q = cfg.bvar.se_fixed_q;
  return obj;
}

std::vector<std::string> dimension_names(const RunConfig& cfg,
                                         Eigen::Index dims) {
  if (cfg.objective == "bvar" && dims == 3) {
    return {"lambda1", "lambda2", "lambda3"};
  }
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < dims; ++i) {
    names.push_back("x" + std::to_string(i + 1));
  }
  return names;
}

int cmd_optimize(const RunConfig& cfg) {
  BoopConfig bo;
  bo.bounds = cfg.bounds;
  bo.alpha = cfg.optimizer.alpha;
  bo.g_min = cfg.optimizer.g_min;
  bo.batch = cfg.optimizer.batch;
  bo.g_max = cfg.optimizer.g_max;
  bo.iterations = cfg.optimizer.iterations + cfg.optimizer.j0;
  bo.j0 = cfg.optimizer.j0;
  bo.seed = cfg.seed;

  ObjectiveFactory factory;
  if (cfg.objective == "bvar") {
    auto obj = std::make_shared<BvarObjective>(make_bvar_objective(cfg));
    if (bo.g_min <= obj->options.burn) {
      throw ConfigError("optimizer.g_min must exceed optimizer.burn");
    }
    factory = [obj](const Eigen::VectorXd& x) {
      return marginal_likelihood_estimator(
          obj->data, obj->prior, ShrinkageParams{x[0], x[1], x[2]},
          obj->options);
    };
  } else {
    auto objective =
        std::make_shared<SyntheticObjective>(standard_bench_objective(
            cfg.bench.noise_sd));
    factory = [objective](const Eigen::VectorXd& x) {
      return simulated_mcmc_estimator(*objective, x);
    };
  }

  RngStream rng(cfg.seed);
  const OptimizationResult result =
      cfg.optimizer.strategy == "bo-ei" ? bo_ei_optimize(factory, bo, rng)
                                        : boop_optimize(factory, bo, rng);

  auto trace_out = open_output(cfg, "trace.csv");
  write_trace_csv(trace_out, result.trace,
                  dimension_names(cfg, cfg.bounds.dim()));
  trace_out.close();
  write_manifest(cfg, "optimize", {"trace.csv"});

  std::printf("best f_hat: %.17g\n", result.best_f);
  std::printf("best x:");
  for (Eigen::Index i = 0; i < result.best_x.size(); ++i) {
    std::printf(" %.17g", result.best_x[i]);
  }
  std::printf("\ntotal draws: %ld\nevaluations: %zu\n",
              result.trace.total_draws, result.trace.records.size());
  return 0;
}

int cmd_grid(const RunConfig& cfg) {
  if (cfg.grid.dims.empty()) {
    throw ConfigError("grid command requires a grid specification");
  }
  if (static_cast<Eigen::Index>(cfg.grid.dims.size()) != cfg.bounds.dim()) {
    throw ConfigError("grid dimensions must match the bounds dimensions");
  }

  std::function<std::pair<double, double>(const Eigen::VectorXd&)> objective;
  std::shared_ptr<BvarObjective> bvar_obj;
  std::shared_ptr<SyntheticObjective> bench_obj;
  std::shared_ptr<RngStream> rng = std::make_shared<RngStream>(cfg.seed);
  if (cfg.objective == "bvar") {
    bvar_obj = std::make_shared<BvarObjective>(make_bvar_objective(cfg));
    if (cfg.optimizer.g_max <= bvar_obj->options.burn) {
      throw ConfigError("optimizer.g_max must exceed optimizer.burn");
    }
    objective = [bvar_obj, rng, &cfg](const Eigen::VectorXd& x) {
      auto estimator = marginal_likelihood_estimator(
          bvar_obj->data, bvar_obj->prior, ShrinkageParams{x[0], x[1], x[2]},
          bvar_obj->options);
      const auto cp = estimator->extend(cfg.optimizer.g_max, *rng);
      return std::make_pair(cp.f_hat, cp.se);
    };
  } else {
    bench_obj = std::make_shared<SyntheticObjective>(
        standard_bench_objective(cfg.bench.noise_sd));
    objective = [bench_obj, rng, &cfg](const Eigen::VectorXd& x) {
      auto estimator = simulated_mcmc_estimator(*bench_obj, x);
      const auto cp = estimator->extend(cfg.optimizer.g_max, *rng);
      return std::make_pair(cp.f_hat, cp.se);
    };
  }

  const GridResult result = grid_search(objective, cfg.grid);

  const auto names = dimension_names(cfg, cfg.bounds.dim());
  auto out = open_output(cfg, "grid.csv");
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << (i == 0 ? "" : ",") << names[i];
  }
  out << ",f_hat,se\n";
  for (const auto& row : result.rows) {
    for (Eigen::Index i = 0; i < row.x.size(); ++i) {
      if (i > 0) out << ',';
      write_double_cell(out, row.x[i]);
    }
    out << ',';
    write_double_cell(out, row.f_hat);
    out << ',';
    write_double_cell(out, row.se);
    out << '\n';
  }
  out.close();
  write_manifest(cfg, "grid", {"grid.csv"});

  if (result.argmax.has_value()) {
    const auto& best = result.rows[*result.argmax];
    std::printf("argmax f_hat: %.17g at", best.f_hat);
    for (Eigen::Index i = 0; i < best.x.size(); ++i) {
      std::printf(" %.17g", best.x[i]);
    }
    std::printf("\n");
  } else {
    std::printf("argmax: none (no finite rows)\n");
  }
  return 0;
}

int cmd_benchmark(const RunConfig& cfg) {
  BoopConfig bo;
  bo.bounds = cfg.bounds;
  bo.alpha = cfg.optimizer.alpha;
  bo.g_min = cfg.optimizer.g_min;
  bo.batch = cfg.optimizer.batch;
  bo.g_max = cfg.optimizer.g_max;
  bo.iterations = cfg.optimizer.iterations + cfg.optimizer.j0;
  bo.j0 = cfg.optimizer.j0;

  const SyntheticObjective objective =
      standard_bench_objective(cfg.bench.noise_sd);
  const CompareReport report =
      compare_strategies(objective, bo, cfg.benchmark.strategies,
                         cfg.benchmark.seeds, cfg.benchmark.gap_fraction);

  auto curves = open_output(cfg, "benchmark_curves.csv");
  write_compare_curves_csv(curves, report);
  curves.close();
  auto summary = open_output(cfg, "benchmark_summary.csv");
  write_compare_summary_csv(summary, report);
  summary.close();
  write_manifest(cfg, "benchmark",
                 {"benchmark_curves.csv", "benchmark_summary.csv"});

  std::printf("true max: %.17g over %zu runs\n", report.true_max,
              report.runs.size());
  return 0;
}

int cmd_chib_validate(const RunConfig& cfg) {
  std::ostringstream report;
  bool all_pass = true;
  RngStream rng(cfg.seed);

  {
    // Location toy with an analytic evidence.
    const int t = 24;
    Eigen::Vector3d tau_sq(1.0, 0.5, 0.25);
    Eigen::VectorXd y(t);
    const double level = rng.normal() * std::sqrt(tau_sq.sum());
    for (int i = 0; i < t; ++i) y[i] = level + rng.normal();
    ThreeBlockGaussianToy toy(y, 1.0, tau_sq);

    const ChibResult res = chib_logml(toy, 2000, 2000, 200, rng);
    const double truth = toy.analytic_log_ml();
    const double diff = std::abs(res.estimate.log_ml - truth);
    const bool pass = diff <= 3.0 * res.estimate.se;
    all_pass = all_pass && pass;
    report << "toy three-block location model: estimate "
           << res.estimate.log_ml << " truth " << truth << " |diff| " << diff
           << " se " << res.estimate.se << " -> "
           << (pass ? "PASS" : "FAIL") << '\n';
  }

  {
    // Conjugate cross-check on synthetic data.
    const int t = 60, n = 2, p = 1;
    Eigen::MatrixXd y(t, n);
    y.row(0) << 0.2, -0.1;
    Eigen::Matrix2d a;
    a << 0.5, 0.1, -0.2, 0.3;
    for (int i = 1; i < t; ++i) {
      y.row(i) = (a * y.row(i - 1).transpose()).transpose();
      y(i, 0) += rng.normal() * 0.7;
      y(i, 1) += rng.normal() * 0.5;
    }
    BvarData data = BvarData::with_intercept(std::move(y), p);

    ConjugateVarPrior prior;
    const int k = n * p + 1;
    prior.coef_mean = Eigen::MatrixXd::Zero(k, n);
    prior.coef_mean(0, 0) = 0.4;
    prior.coef_mean(1, 1) = 0.4;
    prior.omega_diag = Eigen::VectorXd::Constant(k, 0.25);
    prior.omega_diag[k - 1] = 4.0;
    prior.scale = Eigen::Matrix2d::Identity();
    prior.dof = 5.0;

    const double oracle = conjugate_logml_oracle(data, prior);
    ConjugateVarModel model(std::move(data), std::move(prior));
    const ChibResult res = chib_logml(model, 4000, 4000, 400, rng);
    const double diff = std::abs(res.estimate.log_ml - oracle);
    const bool pass = diff <= 3.0 * res.estimate.se;
    all_pass = all_pass && pass;
    report << "conjugate model vs closed form: estimate "
           << res.estimate.log_ml << " oracle " << oracle << " |diff| "
           << diff << " se " << res.estimate.se << " -> "
           << (pass ? "PASS" : "FAIL") << '\n';
  }

  auto out = open_output(cfg, "chib_validate.txt");
  out << report.str();
  out.close();
  write_manifest(cfg, "chib-validate", {"chib_validate.txt"});
  std::fputs(report.str().c_str(), stdout);

  if (!all_pass) {
    throw NumericalError("chib-validate: a check exceeded its 3-se band");
  }
  return 0;
}

int cmd_surface_export(const RunConfig& cfg) {
  const std::string trace_path =
      !cfg.data_path.empty() ? cfg.data_path : cfg.surface.trace_path;
  if (trace_path.empty()) {
    throw ConfigError("surface-export requires surface.trace or --data");
  }
  if (cfg.surface.grid.dims.size() != 2) {
    throw ConfigError("surface.grid must have exactly two dimensions");
  }

  std::ifstream in(trace_path);
  if (!in) throw DataError("cannot open trace '" + trace_path + "'");
  const TraceTable table = read_trace_csv(in);
  if (table.records.empty()) throw DataError("trace has no records");
  if (table.records.front().x.size() != 3) {
    throw DataError("surface-export expects a 3-dimensional trace");
  }

  InputScaler scaler(cfg.bounds.lo, cfg.bounds.hi);
  TrainingSet train;
  std::vector<double> fs;
  for (const auto& r : table.records) {
    train.add(scaler.apply(r.x), r.f_hat, r.se * r.se);
    fs.push_back(r.f_hat);
  }
  const double prior_mean = mean_of(fs);
  const double sd_y = std::max(sd_of(fs), 1e-8);

  KernelFitBounds fit_bounds;
  fit_bounds.sigma_f_lo = sd_y * 1e-3;
  fit_bounds.sigma_f_hi = sd_y * 1e3;
  fit_bounds.ell_lo = 0.05;
  fit_bounds.ell_hi = 20.0;
  RngStream rng(cfg.seed);
  const KernelFitResult fit = gp_fit_hyperparams(
      train, KernelFamily::Matern52, fit_bounds, rng, {}, prior_mean);
  const GpModel model(fit.spec, std::move(train), prior_mean, scaler);

  auto out = open_output(cfg, "surface.csv");
  out << "lambda1,lambda2,lambda3,post_mean,post_sd\n";
  const auto axes = cfg.surface.grid.axis_values();
  for (double l1 : axes[0]) {
    for (double l2 : axes[1]) {
      Eigen::Vector3d x(l1, l2, cfg.surface.lambda3);
      const GpPosteriorPoint post = model.posterior(x);
      write_double_cell(out, l1);
      out << ',';
      write_double_cell(out, l2);
      out << ',';
      write_double_cell(out, cfg.surface.lambda3);
      out << ',';
      write_double_cell(out, post.mean);
      out << ',';
      write_double_cell(out, post.sd);
      out << '\n';
    }
  }
  out.close();
  write_manifest(cfg, "surface-export", {"surface.csv"});
  std::printf("surface rows: %zu\n", axes[0].size() * axes[1].size());
  return 0;
}

}  // namespace

Command command_from_string(const std::string& name) {
  return parse_command(name);
}

RunConfig load_run_config(const std::string& path, Command command,
                          const CliOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  require_keys(root, "top level",
               {"objective", "seed", "bounds", "optimizer", "bvar", "bench",
                "benchmark", "surface", "grid", "data"});

  RunConfig cfg;
  cfg.command = command;
  cfg.objective = get_or<std::string>(root, "objective", "bench");
  if (cfg.objective != "bench" && cfg.objective != "bvar") {
    throw ConfigError("config: objective must be 'bench' or 'bvar'");
  }
  cfg.seed = get_or<std::uint64_t>(root, "seed", 1);

  if (root.contains("optimizer")) {
    const json& o = root.at("optimizer");
    require_keys(o, "optimizer",
                 {"strategy", "alpha", "g_min", "burn", "batch", "g_max",
                  "iterations", "j0"});
    cfg.optimizer.strategy =
        get_or<std::string>(o, "strategy", cfg.optimizer.strategy);
    cfg.optimizer.alpha = get_or<double>(o, "alpha", cfg.optimizer.alpha);
    cfg.optimizer.g_min = get_or<long>(o, "g_min", cfg.optimizer.g_min);
    cfg.optimizer.burn = get_or<long>(o, "burn", cfg.optimizer.burn);
    cfg.optimizer.batch = get_or<long>(o, "batch", cfg.optimizer.batch);
    cfg.optimizer.g_max = get_or<long>(o, "g_max", cfg.optimizer.g_max);
    cfg.optimizer.iterations =
        get_or<long>(o, "iterations", cfg.optimizer.iterations);
    cfg.optimizer.j0 = get_or<int>(o, "j0", cfg.optimizer.j0);
  }
  if (cfg.optimizer.strategy != "boop" && cfg.optimizer.strategy != "bo-ei") {
    throw ConfigError("config: optimizer.strategy must be 'boop' or 'bo-ei'");
  }

  if (root.contains("bvar")) {
    const json& b = root.at("bvar");
    require_keys(b, "bvar",
                 {"lags", "pi_mean", "psi_mean", "psi_sd", "lambda",
                  "own_lag_variance", "se_lag_selection", "se_fixed_q"});
    cfg.bvar.lags = get_or<int>(b, "lags", cfg.bvar.lags);
    if (b.contains("pi_mean")) cfg.bvar.pi_mean = get_vector(b, "pi_mean");
    if (b.contains("psi_mean")) cfg.bvar.psi_mean = get_vector(b, "psi_mean");
    if (b.contains("psi_sd")) cfg.bvar.psi_sd = get_vector(b, "psi_sd");
    if (b.contains("lambda")) {
      const json& l = b.at("lambda");
      require_keys(l, "bvar.lambda", {"lambda1", "lambda2", "lambda3"});
      cfg.bvar.lambda.lambda1 = get_or<double>(l, "lambda1", 0.1);
      cfg.bvar.lambda.lambda2 = get_or<double>(l, "lambda2", 0.5);
      cfg.bvar.lambda.lambda3 = get_or<double>(l, "lambda3", 1.0);
    }
    const std::string variant =
        get_or<std::string>(b, "own_lag_variance", "lag_decay_only");
    if (variant == "lag_decay_only") {
      cfg.bvar.own_lag_variance = OwnLagVariance::LagDecayOnly;
    } else if (variant == "scaled_by_sd") {
      cfg.bvar.own_lag_variance = OwnLagVariance::ScaledBySeriesSd;
    } else {
      throw ConfigError("config: bad own_lag_variance");
    }
    const std::string sel = get_or<std::string>(b, "se_lag_selection", "aic");
    if (sel == "aic") {
      cfg.bvar.se_aic_selection = true;
    } else if (sel == "fixed") {
      cfg.bvar.se_aic_selection = false;
    } else {
      throw ConfigError("config: se_lag_selection must be 'aic' or 'fixed'");
    }
    cfg.bvar.se_fixed_q = get_or<int>(b, "se_fixed_q", cfg.bvar.se_fixed_q);
  }

  if (root.contains("bench")) {
    const json& b = root.at("bench");
    require_keys(b, "bench", {"noise_sd"});
    cfg.bench.noise_sd = get_or<double>(b, "noise_sd", cfg.bench.noise_sd);
  }

  if (root.contains("benchmark")) {
    const json& b = root.at("benchmark");
    require_keys(b, "benchmark", {"seeds", "strategies", "gap_fraction"});
    cfg.benchmark.seeds = get_or<std::vector<std::uint64_t>>(
        b, "seeds", cfg.benchmark.seeds);
    cfg.benchmark.strategies = get_or<std::vector<std::string>>(
        b, "strategies", cfg.benchmark.strategies);
    cfg.benchmark.gap_fraction =
        get_or<double>(b, "gap_fraction", cfg.benchmark.gap_fraction);
    for (const auto& s : cfg.benchmark.strategies) {
      if (s != "boop" && s != "bo-ei") {
        throw ConfigError("config: benchmark strategies must be boop|bo-ei");
      }
    }
  }

  if (root.contains("surface")) {
    const json& s = root.at("surface");
    require_keys(s, "surface", {"trace", "lambda3", "grid"});
    cfg.surface.trace_path = get_or<std::string>(s, "trace", "");
    cfg.surface.lambda3 = get_or<double>(s, "lambda3", 1.0);
    if (s.contains("grid")) {
      cfg.surface.grid = parse_grid(s.at("grid"), "surface.grid");
    }
  }

  if (root.contains("grid")) {
    cfg.grid = parse_grid(root.at("grid"), "grid");
  }

  if (root.contains("data")) {
    const json& d = root.at("data");
    require_keys(d, "data", {"path", "series"});
    cfg.data_path = get_or<std::string>(d, "path", "");
    if (d.contains("series")) {
      for (const auto& item : d.at("series")) {
        require_keys(item, "data.series", {"name", "transform", "frequency"});
        SeriesSpec spec;
        spec.name = get_or<std::string>(item, "name", "");
        if (spec.name.empty()) {
          throw ConfigError("config: series entries need a name");
        }
        spec.transform = transform_from_string(
            get_or<std::string>(item, "transform", "none"));
        spec.frequency = frequency_from_string(
            get_or<std::string>(item, "frequency", "Q"));
        cfg.series.push_back(std::move(spec));
      }
    }
  }

  if (root.contains("bounds")) {
    const json& b = root.at("bounds");
    require_keys(b, "bounds", {"lower", "upper"});
    cfg.bounds.lo = get_vector(b, "lower");
    cfg.bounds.hi = get_vector(b, "upper");
    cfg.bounds_set = true;
  }

  // CLI overrides come in after the file so they always win.
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.strategy) cfg.optimizer.strategy = *overrides.strategy;
  if (overrides.data_path) cfg.data_path = *overrides.data_path;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;

  if (!cfg.bounds_set) cfg.bounds = default_bounds(cfg.objective);
  cfg.bounds.validate();
  if (cfg.objective == "bvar" && cfg.bounds.dim() != 3) {
    throw ConfigError("config: bvar bounds must be 3-dimensional");
  }
  if (cfg.objective == "bench" && cfg.bounds.dim() != 2) {
    throw ConfigError("config: bench bounds must be 2-dimensional");
  }

  if (cfg.objective == "bvar" &&
      (command == Command::Optimize || command == Command::Grid)) {
    if (cfg.series.empty()) {
      throw ConfigError("config: bvar objective requires data.series");
    }
    const int n = static_cast<int>(cfg.series.size());
    const int p = cfg.bvar.lags;
    if (cfg.bvar.pi_mean.size() != n * n * p) {
      throw ConfigError("config: bvar.pi_mean must have n^2*lags entries");
    }
    if (cfg.bvar.psi_mean.size() != n || cfg.bvar.psi_sd.size() != n) {
      throw ConfigError("config: bvar psi moments must have n entries");
    }
  }

  if (cfg.optimizer.alpha < 0.0 || cfg.optimizer.alpha >= 1.0 ||
      cfg.optimizer.g_min < 1 || cfg.optimizer.batch < 1 ||
      cfg.optimizer.g_max < cfg.optimizer.g_min || cfg.optimizer.j0 < 2 ||
      cfg.optimizer.iterations < 0 || cfg.optimizer.burn < 0) {
    throw ConfigError("config: optimizer settings out of range");
  }
  return cfg;
}

int run_command(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  switch (cfg.command) {
    case Command::Optimize: return cmd_optimize(cfg);
    case Command::Grid: return cmd_grid(cfg);
    case Command::Benchmark: return cmd_benchmark(cfg);
    case Command::ChibValidate: return cmd_chib_validate(cfg);
    case Command::SurfaceExport: return cmd_surface_export(cfg);
  }
  throw ConfigError("run_command: unknown command");
}

}  // namespace boop
