#include "ucgrad/estimators.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "ucgrad/backprop.hpp"
#include "ucgrad/parallel.hpp"
#include "ucgrad/rng.hpp"

namespace ucgrad {

namespace {

constexpr double kNormGuard = 1e-12;

void check_window(const char* who, int step_index, int k_steps, const UnrolledSystem& system) {
  if (k_steps < 1)
    throw HorizonError(std::string(who) + ": k_steps must be >= 1, got " + std::to_string(k_steps));
  if (step_index + k_steps > system.horizon())
    throw HorizonError(std::string(who) + ": step_index " + std::to_string(step_index) + " + K " +
                       std::to_string(k_steps) + " exceeds horizon T " +
                       std::to_string(system.horizon()));
}

double particle_unroll(const UnrolledSystem& system, SystemState& state, const Vector& theta,
                       int k_steps, int particle_index) {
  try {
    UnrollResult r = unroll(system, std::move(state), theta, k_steps);
    state = std::move(r.final_state);
    return r.loss_sum;
  } catch (const NonFiniteError& e) {
    throw NonFiniteError("particle " + std::to_string(particle_index) + ": " + e.what());
  }
}

// Shared reduction: grad = sum_i weights[i] * losses[i] / (N sigma^2), summed
// in ascending particle index so the result is independent of how the pair
// unrolls were scheduled.
GradientEstimate reduce_weighted(const std::vector<Vector>& weights,
                                 const std::vector<double>& values,
                                 const std::vector<double>& losses, const NoiseSpec& noise,
                                 int param_dim) {
  const int n = noise.n_particles;
  GradientEstimate est;
  est.grad = Vector::Zero(param_dim);
  double loss_acc = 0.0;
  for (int i = 0; i < n; ++i) {
    est.grad.noalias() += weights[static_cast<size_t>(i)] * values[static_cast<size_t>(i)];
    loss_acc += losses[static_cast<size_t>(i)];
  }
  est.grad /= static_cast<double>(n) * noise.sigma * noise.sigma;
  est.mean_loss = loss_acc / static_cast<double>(n);
  est.pair_loss_diffs.resize(static_cast<size_t>(n / 2));
  for (int j = 0; j < n / 2; ++j)
    est.pair_loss_diffs[static_cast<size_t>(j)] =
        losses[static_cast<size_t>(2 * j)] - losses[static_cast<size_t>(2 * j + 1)];
  return est;
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError("noise.sigma: must be finite and > 0");
  if (n_particles < 2 || n_particles % 2 != 0)
    throw ConfigError("noise.n_particles: must be an even integer >= 2, got " +
                      std::to_string(n_particles));
}

ParticleEnsemble make_ensemble(const UnrolledSystem& system, int n_particles) {
  ParticleEnsemble e;
  e.states.assign(static_cast<size_t>(n_particles), system.init_state());
  e.accumulators.assign(static_cast<size_t>(n_particles), Vector::Zero(system.param_dim()));
  e.unroll_count = 0;
  return e;
}

void reset(ParticleEnsemble& ensemble, const UnrolledSystem& system) {
  const SystemState s0 = system.init_state();
  for (auto& s : ensemble.states) s = s0;
  for (auto& a : ensemble.accumulators) a.setZero();
  ensemble.unroll_count = 0;
}

RtrlState make_rtrl_state(const UnrolledSystem& system) {
  return RtrlState{Matrix::Zero(system.state_dim(), system.param_dim())};
}

void reset(RtrlState& state, const UnrolledSystem& system) {
  state.G = Matrix::Zero(system.state_dim(), system.param_dim());
}

UoroState make_uoro_state(const UnrolledSystem& system) {
  return UoroState{Vector::Zero(system.state_dim()), Vector::Zero(system.param_dim())};
}

void reset(UoroState& state, const UnrolledSystem& system) {
  state.s_tilde = Vector::Zero(system.state_dim());
  state.theta_tilde = Vector::Zero(system.param_dim());
}

Vector pair_perturbation(const NoiseSpec& noise, const UnrolledSystem& system,
                         std::uint64_t outer_iter, int pair_index) {
  rng::CounterStream stream(
      rng::mix_stream(noise.base_seed, outer_iter, static_cast<std::uint64_t>(pair_index)));
  return stream.gaussian_vector(system.param_dim(), noise.sigma);
}

GradientEstimate es_step(const UnrolledSystem& system, SystemState& mean_state,
                         const Vector& theta, int k_steps, const NoiseSpec& noise,
                         std::uint64_t outer_iter, int workers) {
  noise.validate();
  check_window("es_step", mean_state.step_index, k_steps, system);
  const int n = noise.n_particles;
  std::vector<Vector> weights(static_cast<size_t>(n));
  std::vector<double> losses(static_cast<size_t>(n));

  parallel_for(n / 2, workers, [&](long j) {
    const Vector eps = pair_perturbation(noise, system, outer_iter, static_cast<int>(j));
    for (int half = 0; half < 2; ++half) {
      const int i = static_cast<int>(2 * j) + half;
      const Vector w = half == 0 ? eps : Vector(-eps);
      SystemState s = mean_state;
      losses[static_cast<size_t>(i)] = particle_unroll(system, s, theta + w, k_steps, i);
      weights[static_cast<size_t>(i)] = w;
    }
  });

  GradientEstimate est = reduce_weighted(weights, losses, losses, noise, system.param_dim());
  mean_state = unroll(system, std::move(mean_state), theta, k_steps).final_state;
  return est;
}

GradientEstimate pes_step(const UnrolledSystem& system, ParticleEnsemble& ensemble,
                          const Vector& theta, int k_steps, const NoiseSpec& noise,
                          std::uint64_t outer_iter, int workers) {
  noise.validate();
  if (static_cast<int>(ensemble.states.size()) != noise.n_particles)
    throw ConfigError("pes_step: ensemble has " + std::to_string(ensemble.states.size()) +
                      " particles, noise spec says " + std::to_string(noise.n_particles));
  check_window("pes_step", ensemble.step_index(), k_steps, system);
  const int n = noise.n_particles;
  std::vector<Vector> weights(static_cast<size_t>(n));
  std::vector<double> losses(static_cast<size_t>(n));

  parallel_for(n / 2, workers, [&](long j) {
    const Vector eps = pair_perturbation(noise, system, outer_iter, static_cast<int>(j));
    for (int half = 0; half < 2; ++half) {
      const int i = static_cast<int>(2 * j) + half;
      const Vector w = half == 0 ? eps : Vector(-eps);
      losses[static_cast<size_t>(i)] = particle_unroll(
          system, ensemble.states[static_cast<size_t>(i)], theta + w, k_steps, i);
      ensemble.accumulators[static_cast<size_t>(i)] += w;
      weights[static_cast<size_t>(i)] = ensemble.accumulators[static_cast<size_t>(i)];
    }
  });

  ensemble.unroll_count += 1;
  return reduce_weighted(weights, losses, losses, noise, system.param_dim());
}

GradientEstimate pes_analytic_step(const UnrolledSystem& system, ParticleEnsemble& ensemble,
                                   SystemState& mean_state, const Vector& theta, int k_steps,
                                   const NoiseSpec& noise, std::uint64_t outer_iter, int workers) {
  noise.validate();
  if (!system.has_jacobians())
    throw CapabilityError("pes_analytic_step: system does not provide Jacobians");
  if (static_cast<int>(ensemble.states.size()) != noise.n_particles)
    throw ConfigError("pes_analytic_step: ensemble has " + std::to_string(ensemble.states.size()) +
                      " particles, noise spec says " + std::to_string(noise.n_particles));
  check_window("pes_analytic_step", ensemble.step_index(), k_steps, system);

  WindowGradient wg = window_gradient(system, mean_state, theta, k_steps);
  const Vector p = wg.grad;
  mean_state = std::move(wg.final_state);

  const int n = noise.n_particles;
  std::vector<Vector> weights(static_cast<size_t>(n));
  std::vector<double> values(static_cast<size_t>(n));
  std::vector<double> losses(static_cast<size_t>(n));

  parallel_for(n / 2, workers, [&](long j) {
    const Vector eps = pair_perturbation(noise, system, outer_iter, static_cast<int>(j));
    for (int half = 0; half < 2; ++half) {
      const int i = static_cast<int>(2 * j) + half;
      const Vector w = half == 0 ? eps : Vector(-eps);
      const double loss = particle_unroll(
          system, ensemble.states[static_cast<size_t>(i)], theta + w, k_steps, i);
      losses[static_cast<size_t>(i)] = loss;
      // accumulator is read before the fresh perturbation is added
      weights[static_cast<size_t>(i)] = ensemble.accumulators[static_cast<size_t>(i)];
      values[static_cast<size_t>(i)] = loss - w.dot(p);
      ensemble.accumulators[static_cast<size_t>(i)] += w;
    }
  });

  ensemble.unroll_count += 1;
  GradientEstimate est = reduce_weighted(weights, values, losses, noise, system.param_dim());
  est.grad += p;
  return est;
}

GradientEstimate tbptt_step(const UnrolledSystem& system, SystemState& state, const Vector& theta,
                            int k_steps) {
  WindowGradient wg = window_gradient(system, state, theta, k_steps);
  state = std::move(wg.final_state);
  GradientEstimate est;
  est.grad = std::move(wg.grad);
  est.mean_loss = wg.loss_sum;
  return est;
}

GradientEstimate rtrl_step(const UnrolledSystem& system, SystemState& state, RtrlState& jstate,
                           const Vector& theta, int k_steps) {
  if (!system.has_jacobians())
    throw CapabilityError("rtrl_step: system does not provide Jacobians");
  check_window("rtrl_step", state.step_index, k_steps, system);
  if (jstate.G.rows() != system.state_dim() || jstate.G.cols() != system.param_dim())
    throw ConfigError("rtrl_step: G is " + std::to_string(jstate.G.rows()) + "x" +
                      std::to_string(jstate.G.cols()) + ", expected " +
                      std::to_string(system.state_dim()) + "x" + std::to_string(system.param_dim()));

  GradientEstimate est;
  est.grad = Vector::Zero(system.param_dim());
  double loss_sum = 0.0;
  for (int k = 0; k < k_steps; ++k) {
    const Matrix H = system.jac_state(state, theta);
    const Matrix F = system.jac_param(state, theta);
    StepResult r = system.step(state, theta);
    if (!std::isfinite(r.loss))
      throw NonFiniteError("rtrl_step: non-finite loss at step " +
                           std::to_string(state.step_index + 1));
    state = std::move(r.state);
    loss_sum += r.loss;
    jstate.G = H * jstate.G + F;
    const LossGrads lg = system.loss_grads(state, theta);
    est.grad.noalias() += jstate.G.transpose() * lg.d_state;
    est.grad += lg.d_theta;
  }
  est.mean_loss = loss_sum;
  return est;
}

GradientEstimate uoro_step(const UnrolledSystem& system, SystemState& state, UoroState& jstate,
                           const Vector& theta, int k_steps, std::uint64_t seed) {
  if (!system.has_jacobians())
    throw CapabilityError("uoro_step: system does not provide Jacobians");
  check_window("uoro_step", state.step_index, k_steps, system);

  rng::CounterStream stream(seed);
  GradientEstimate est;
  est.grad = Vector::Zero(system.param_dim());
  double loss_sum = 0.0;
  for (int k = 0; k < k_steps; ++k) {
    const Matrix H = system.jac_state(state, theta);
    const Matrix F = system.jac_param(state, theta);
    const Vector nu = stream.rademacher_vector(system.state_dim());

    const Vector Hs = H * jstate.s_tilde;
    const Vector Fnu = F.transpose() * nu;
    const double n_theta = jstate.theta_tilde.norm();
    const double n_Hs = Hs.norm();
    const double n_Fnu = Fnu.norm();
    const double n_nu = nu.norm();
    const double rho0 = (n_theta < kNormGuard || n_Hs < kNormGuard) ? 1.0 : std::sqrt(n_theta / n_Hs);
    const double rho1 = (n_Fnu < kNormGuard || n_nu < kNormGuard) ? 1.0 : std::sqrt(n_Fnu / n_nu);

    jstate.s_tilde = rho0 * Hs + rho1 * nu;
    jstate.theta_tilde = jstate.theta_tilde / rho0 + Fnu / rho1;

    StepResult r = system.step(state, theta);
    if (!std::isfinite(r.loss))
      throw NonFiniteError("uoro_step: non-finite loss at step " +
                           std::to_string(state.step_index + 1));
    state = std::move(r.state);
    loss_sum += r.loss;
    const LossGrads lg = system.loss_grads(state, theta);
    est.grad.noalias() += lg.d_state.dot(jstate.s_tilde) * jstate.theta_tilde;
    est.grad += lg.d_theta;
  }
  est.mean_loss = loss_sum;
  return est;
}

}  // namespace ucgrad
