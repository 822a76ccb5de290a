// Command-line driver: runs optimization experiments, variance measurements
// and finite-difference gradient checks from flat config files.
//
// Exit codes: 0 success, 1 check failure, 2 config error, 3 numerical abort.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ucgrad/backprop.hpp"
#include "ucgrad/bench/emit.hpp"
#include "ucgrad/bench/experiment.hpp"
#include "ucgrad/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace ucgrad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string resolve_out_dir(const std::string& flag_out, const std::string& config_out,
                            const std::string& config_path) {
  if (!flag_out.empty()) return flag_out;
  if (!config_out.empty()) return config_out;
  const std::string stem = fs::path(config_path).stem().string();
  if (const char* root = std::getenv("UCGRAD_OUT_ROOT"); root && *root)
    return (fs::path(root) / stem).string();
  return (fs::path("runs") / stem).string();
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            std::optional<long> seed_flag, std::optional<int> workers_flag) {
  bench::ExperimentConfig cfg = bench::load_experiment_config(config_path);
  if (seed_flag) cfg.noise.base_seed = static_cast<std::uint64_t>(*seed_flag);
  if (workers_flag) cfg.workers = *workers_flag;
  cfg.out_dir = resolve_out_dir(out_flag, cfg.out_dir, config_path);

  const bench::RunLog log = bench::run_experiment(cfg);
  bench::emit_results(log, cfg, cfg.out_dir);

  std::cout << "task " << cfg.task_name << " estimator " << to_string(cfg.estimator) << ": "
            << cfg.iterations << " iterations\n";
  if (log.final_theta.size() > 0) {
    std::cout << "final theta =";
    for (Eigen::Index i = 0; i < log.final_theta.size(); ++i)
      std::printf(" %.10g", log.final_theta[i]);
    std::cout << "\n";
  }
  std::printf("final meta-loss = %.10g, best = %.10g\n", log.final_meta_loss, log.best_meta_loss);
  std::cout << "results written to " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_variance(const std::string& config_path, const std::string& out_flag,
                 std::optional<long> seed_flag, std::optional<int> workers_flag) {
  bench::VarianceJob job = bench::load_variance_config(config_path);
  if (seed_flag) job.noise.base_seed = static_cast<std::uint64_t>(*seed_flag);
  if (workers_flag) job.workers = *workers_flag;
  job.out_dir = resolve_out_dir(out_flag, job.out_dir, config_path);

  const auto points = bench::run_variance_job(job);
  bench::emit_variance(points, job, job.out_dir);

  std::cout << "scenario " << tasks::to_string(job.scenario) << ", P = " << job.param_dim
            << ", trials = " << job.n_trials << "\n";
  for (const auto& pt : points) {
    std::printf("T = %-5d empirical = %-12.6g analytic = %-12.6g se = %.3g%s\n", pt.horizon,
                pt.report.total_variance, pt.analytic, pt.report.standard_error,
                pt.report.leading_order_flag ? "  [leading-order]" : "");
  }
  std::cout << "results written to " << job.out_dir << "\n";
  return kExitOk;
}

int cmd_gradcheck(const std::string& task_name, int horizon) {
  tasks::KeyValues kv;
  if (horizon > 0) kv["horizon"] = std::to_string(horizon);
  // scenario tasks need a nontrivial horizon for a meaningful check
  if (task_name == "quadratic") {
    kv["P"] = "3";
    if (horizon <= 0) kv["horizon"] = "6";
  }
  const auto task = tasks::make_task(task_name, kv);
  if (!task->has_jacobians()) {
    std::cout << task_name << ": no Jacobians declared; nothing to check\n";
    return kExitOk;
  }
  const auto results = gradcheck(*task, task->init_params());
  for (const auto& r : results) {
    std::printf("[%s] %-18s max rel err = %.3e (tol %.1e)\n", r.passed ? "ok" : "FAIL",
                r.name.c_str(), r.max_rel_err, r.tolerance);
  }
  return all_passed(results) ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient estimators for unrolled computation graphs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, task_name;
  std::optional<long> seed;
  std::optional<int> workers;
  int horizon = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "base seed (overrides config)");
    sub->add_option("--workers", workers, "worker threads (overrides config)");
  };

  CLI::App* run = app.add_subcommand("run", "run an optimization experiment");
  run->add_option("config", config_path, "experiment config file")->required();
  add_common(run);

  CLI::App* var = app.add_subcommand("variance", "measure estimator variance");
  var->add_option("config", config_path, "variance config file")->required();
  add_common(var);

  CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient validation");
  gc->add_option("task", task_name, "task name")->required();
  gc->add_option("--horizon", horizon, "override the task horizon");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, workers);
    if (var->parsed()) return cmd_variance(config_path, out_dir, seed, workers);
    return cmd_gradcheck(task_name, horizon);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonFiniteError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
