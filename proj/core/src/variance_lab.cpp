#include "ucgrad/variance_lab.hpp"

#include <cmath>

#include "ucgrad/backprop.hpp"
#include "ucgrad/parallel.hpp"
#include "ucgrad/rng.hpp"

namespace ucgrad {

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "es") return EstimatorKind::Es;
  if (s == "pes") return EstimatorKind::Pes;
  if (s == "pes_analytic") return EstimatorKind::PesAnalytic;
  if (s == "tbptt") return EstimatorKind::Tbptt;
  if (s == "rtrl") return EstimatorKind::Rtrl;
  if (s == "uoro") return EstimatorKind::Uoro;
  throw ConfigError("estimator.kind: unknown '" + s +
                    "' (expected es|pes|pes_analytic|tbptt|rtrl|uoro)");
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Es: return "es";
    case EstimatorKind::Pes: return "pes";
    case EstimatorKind::PesAnalytic: return "pes_analytic";
    case EstimatorKind::Tbptt: return "tbptt";
    case EstimatorKind::Rtrl: return "rtrl";
    case EstimatorKind::Uoro: return "uoro";
  }
  return "?";
}

GroundTruth ground_truth_gradient(const UnrolledSystem& task, const Vector& theta, double sigma,
                                  int n_particles_large, std::uint64_t seed, int workers,
                                  bool compute_smoothed) {
  GroundTruth out;
  if (auto g = task.analytic_gradient(theta)) {
    out.gradient = std::move(*g);
    out.provenance = "analytic";
  } else if (task.has_jacobians()) {
    out.gradient = full_gradient(task, theta);
    out.provenance = "full_gradient";
  }
  if (compute_smoothed || out.provenance.empty()) {
    NoiseSpec noise;
    noise.sigma = sigma;
    noise.n_particles = n_particles_large % 2 == 0 ? n_particles_large : n_particles_large + 1;
    noise.base_seed = seed;
    SystemState s = task.init_state();
    out.smoothed_es = es_step(task, s, theta, task.horizon(), noise, 0, workers).grad;
    if (out.provenance.empty()) {
      out.gradient = *out.smoothed_es;
      out.provenance = "es_smoothed";
    }
  }
  return out;
}

namespace {

// one trial: accumulate estimates over all T/K unrolls with theta frozen
Vector run_trial(EstimatorKind kind, const UnrolledSystem& task, int k_steps,
                 const NoiseSpec& noise, const Vector& theta) {
  const int n_windows = task.horizon() / k_steps;
  Vector acc = Vector::Zero(task.param_dim());
  switch (kind) {
    case EstimatorKind::Es: {
      SystemState mean = task.init_state();
      for (int w = 0; w < n_windows; ++w)
        acc += es_step(task, mean, theta, k_steps, noise, static_cast<std::uint64_t>(w)).grad;
      break;
    }
    case EstimatorKind::Pes: {
      ParticleEnsemble ens = make_ensemble(task, noise.n_particles);
      for (int w = 0; w < n_windows; ++w)
        acc += pes_step(task, ens, theta, k_steps, noise, static_cast<std::uint64_t>(w)).grad;
      break;
    }
    case EstimatorKind::PesAnalytic: {
      ParticleEnsemble ens = make_ensemble(task, noise.n_particles);
      SystemState mean = task.init_state();
      for (int w = 0; w < n_windows; ++w)
        acc += pes_analytic_step(task, ens, mean, theta, k_steps, noise,
                                 static_cast<std::uint64_t>(w))
                   .grad;
      break;
    }
    case EstimatorKind::Tbptt: {
      SystemState s = task.init_state();
      for (int w = 0; w < n_windows; ++w) acc += tbptt_step(task, s, theta, k_steps).grad;
      break;
    }
    case EstimatorKind::Rtrl: {
      SystemState s = task.init_state();
      RtrlState j = make_rtrl_state(task);
      for (int w = 0; w < n_windows; ++w) acc += rtrl_step(task, s, j, theta, k_steps).grad;
      break;
    }
    case EstimatorKind::Uoro: {
      SystemState s = task.init_state();
      UoroState j = make_uoro_state(task);
      for (int w = 0; w < n_windows; ++w)
        acc += uoro_step(task, s, j, theta, k_steps,
                         rng::mix_stream(noise.base_seed, 0x06060, static_cast<std::uint64_t>(w)))
                   .grad;
      break;
    }
  }
  return acc;
}

}  // namespace

VarianceReport empirical_variance(EstimatorKind kind, const UnrolledSystem& task, int k_steps,
                                  const NoiseSpec& noise, long n_trials,
                                  std::optional<Vector> theta_opt, int workers,
                                  bool no_param_updates) {
  if (!no_param_updates)
    throw ConfigError(
        "variance.no_param_updates: measuring with online updates mixes hysteresis into the "
        "variance; only the frozen-theta protocol is supported");
  if (n_trials < 2) throw ConfigError("variance.n_trials: must be >= 2");
  if (k_steps < 1 || task.horizon() % k_steps != 0)
    throw ConfigError("variance.K: horizon " + std::to_string(task.horizon()) +
                      " is not divisible by K " + std::to_string(k_steps));
  const Vector theta = theta_opt ? std::move(*theta_opt) : task.init_params();
  const int P = task.param_dim();

  Matrix samples(n_trials, P);
  parallel_for(n_trials, workers, [&](long r) {
    NoiseSpec trial_noise = noise;
    trial_noise.base_seed = rng::mix_stream(noise.base_seed, 0x741a1, static_cast<std::uint64_t>(r));
    samples.row(r) = run_trial(kind, task, k_steps, trial_noise, theta).transpose();
  });

  VarianceReport rep;
  rep.n_trials = n_trials;
  rep.mean_estimate = samples.colwise().mean().transpose();
  rep.per_coordinate.resize(P);
  for (int j = 0; j < P; ++j) {
    const double m = rep.mean_estimate[j];
    rep.per_coordinate[j] =
        (samples.col(j).array() - m).square().sum() / static_cast<double>(n_trials - 1);
  }
  rep.total_variance = rep.per_coordinate.sum();

  // 20-batch SE of the total variance
  const long n_batches = std::min<long>(20, n_trials / 2);
  Vector batch_vals(n_batches);
  for (long b = 0; b < n_batches; ++b) {
    const long lo = n_trials * b / n_batches;
    const long hi = n_trials * (b + 1) / n_batches;
    const auto block = samples.middleRows(lo, hi - lo);
    double tot = 0.0;
    for (int j = 0; j < P; ++j) {
      const double m = block.col(j).mean();
      tot += (block.col(j).array() - m).square().sum() / static_cast<double>(hi - lo - 1);
    }
    batch_vals[b] = tot;
  }
  const double bm = batch_vals.mean();
  const double bvar =
      (batch_vals.array() - bm).square().sum() / static_cast<double>(std::max<long>(1, n_batches - 1));
  rep.standard_error = std::sqrt(bvar / static_cast<double>(n_batches));

  GroundTruth gt = ground_truth_gradient(task, theta, noise.sigma);
  rep.ground_truth_provenance = gt.provenance;
  const double gnorm2 = gt.gradient.squaredNorm();
  rep.normalized = gnorm2 > 0.0 ? rep.total_variance / gnorm2 : rep.total_variance;
  if (const auto* q = dynamic_cast<const tasks::QuadraticScenarioTask*>(&task))
    rep.leading_order_flag = q->scenario() == tasks::Scenario::UpperTriIid;
  return rep;
}

double analytic_variance(tasks::Scenario scenario, int param_dim, int n_unrolls,
                         double g_norm_sq) {
  if (param_dim < 1 || n_unrolls < 1)
    throw ConfigError("analytic_variance: P and T must be >= 1");
  const double P = static_cast<double>(param_dim);
  const double T = static_cast<double>(n_unrolls);
  switch (scenario) {
    case tasks::Scenario::DiagIdentical:
      return g_norm_sq * (P / 2.0 + P / (2.0 * T) + 1.0 / T);
    case tasks::Scenario::DiagIid:
      return g_norm_sq * (P * T / 2.0 + P / 2.0 + 1.0);
    case tasks::Scenario::UpperTriIdentical: {
      const double h2 = g_norm_sq * std::pow(2.0 / (T * (T + 1.0)), 2);
      return (P + 1.0) * h2 * T * (T + 1.0) * (T * T + T + 1.0) / 6.0;
    }
    case tasks::Scenario::UpperTriIid:
      return (P + 1.0) * g_norm_sq * (T * T + T + 1.0) / 3.0;
  }
  throw ConfigError("analytic_variance: bad scenario");
}

}  // namespace ucgrad
