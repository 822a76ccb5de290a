#include "ucgrad/bench/experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "ucgrad/backprop.hpp"
#include "ucgrad/rng.hpp"

namespace ucgrad::bench {

RunLog run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto task = tasks::make_task(cfg.task_name, cfg.task_params);
  const UnrolledSystem& sys = *task;
  const int T = sys.horizon();
  const int K = cfg.unroll_length;
  if (T % K != 0)
    throw ConfigError("estimator.unroll_length: horizon " + std::to_string(T) +
                      " is not divisible by K " + std::to_string(K) +
                      " (partial final windows are rejected)");

  Vector theta = cfg.theta_override ? *cfg.theta_override : sys.init_params();
  if (theta.size() != sys.param_dim())
    throw ConfigError("run.theta: expected " + std::to_string(sys.param_dim()) + " values, got " +
                      std::to_string(theta.size()));

  OptimizerState opt = make_optimizer(cfg.outer, sys.param_dim());

  SystemState mean_state = sys.init_state();
  ParticleEnsemble ensemble;
  const bool wants_ensemble =
      cfg.estimator == EstimatorKind::Pes || cfg.estimator == EstimatorKind::PesAnalytic;
  if (wants_ensemble) ensemble = make_ensemble(sys, cfg.noise.n_particles);
  RtrlState rtrl = make_rtrl_state(sys);
  UoroState uoro = make_uoro_state(sys);

  RunLog log;
  log.rows.reserve(static_cast<size_t>(cfg.iterations));
  log.best_meta_loss = std::numeric_limits<double>::infinity();
  log.final_meta_loss = std::numeric_limits<double>::quiet_NaN();
  const auto t_start = std::chrono::steady_clock::now();

  int inner_t = 0;
  for (long i = 0; i < cfg.iterations; ++i) {
    if (inner_t >= T) {
      mean_state = sys.init_state();
      if (wants_ensemble) reset(ensemble, sys);
      reset(rtrl, sys);
      reset(uoro, sys);
      inner_t = 0;
    }

    GradientEstimate est;
    switch (cfg.estimator) {
      case EstimatorKind::Es:
        est = es_step(sys, mean_state, theta, K, cfg.noise, static_cast<std::uint64_t>(i),
                      cfg.workers);
        break;
      case EstimatorKind::Pes:
        est = pes_step(sys, ensemble, theta, K, cfg.noise, static_cast<std::uint64_t>(i),
                       cfg.workers);
        break;
      case EstimatorKind::PesAnalytic:
        est = pes_analytic_step(sys, ensemble, mean_state, theta, K, cfg.noise,
                                static_cast<std::uint64_t>(i), cfg.workers);
        break;
      case EstimatorKind::Tbptt:
        est = tbptt_step(sys, mean_state, theta, K);
        break;
      case EstimatorKind::Rtrl:
        est = rtrl_step(sys, mean_state, rtrl, theta, K);
        break;
      case EstimatorKind::Uoro:
        est = uoro_step(sys, mean_state, uoro, theta, K,
                        rng::mix_stream(cfg.noise.base_seed, 0x06060,
                                        static_cast<std::uint64_t>(i)));
        break;
    }

    theta = apply_update(opt, theta, est.grad);

    RunRow row;
    row.iteration = i;
    row.inner_t = inner_t;
    row.theta = theta;
    row.grad_norm = est.grad.norm();
    row.meta_loss = std::numeric_limits<double>::quiet_NaN();
    if (i % cfg.eval_every == 0 || i + 1 == cfg.iterations) {
      row.meta_loss = unroll(sys, sys.init_state(), theta, T).loss_sum;
      log.best_meta_loss = std::min(log.best_meta_loss, row.meta_loss);
      log.final_meta_loss = row.meta_loss;
    }
    row.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    log.rows.push_back(std::move(row));

    inner_t += K;
  }

  log.final_theta = theta;
  return log;
}

std::vector<VariancePoint> run_variance_job(const VarianceJob& job) {
  std::vector<VariancePoint> out;
  out.reserve(job.horizon_points.size());
  for (int T : job.horizon_points) {
    tasks::QuadraticScenarioTask task(job.scenario, job.param_dim, T, job.g_norm);
    VariancePoint pt;
    pt.horizon = T;
    pt.report = empirical_variance(job.estimator, task, job.unroll_length, job.noise, job.n_trials,
                                   std::nullopt, job.workers);
    pt.analytic = analytic_variance(job.scenario, job.param_dim, T / job.unroll_length,
                                    job.g_norm * job.g_norm);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace ucgrad::bench
