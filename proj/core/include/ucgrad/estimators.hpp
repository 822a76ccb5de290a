#pragma once

#include <cstdint>
#include <vector>

#include "ucgrad/system.hpp"

namespace ucgrad {

// Perturbation settings shared by the ES-family estimators. n_particles must
// be even: particles form antithetic pairs (2j, 2j+1) with mirrored noise.
struct NoiseSpec {
  double sigma = 0.1;
  int n_particles = 2;
  std::uint64_t base_seed = 0;

  void validate() const;
};

struct GradientEstimate {
  Vector grad;
  // ES/PES: mean particle window loss; exact methods: the window loss sum.
  double mean_loss = 0.0;
  // per antithetic pair: L(+eps) - L(-eps) over the window
  std::vector<double> pair_loss_diffs;
};

// Persistent particle set for PES: states evolve across unrolls and each
// particle keeps the running sum of every perturbation it has experienced
// since the last reset.
struct ParticleEnsemble {
  std::vector<SystemState> states;
  std::vector<Vector> accumulators;
  long unroll_count = 0;

  int step_index() const { return states.empty() ? 0 : states.front().step_index; }
};

ParticleEnsemble make_ensemble(const UnrolledSystem& system, int n_particles);
void reset(ParticleEnsemble& ensemble, const UnrolledSystem& system);

// Forward-accumulated Jacobian G = d s_t / d theta (S x P).
struct RtrlState {
  Matrix G;
};
RtrlState make_rtrl_state(const UnrolledSystem& system);
void reset(RtrlState& state, const UnrolledSystem& system);

// Rank-1 surrogate for G: G ~= s_tilde * theta_tilde^T.
struct UoroState {
  Vector s_tilde;
  Vector theta_tilde;
};
UoroState make_uoro_state(const UnrolledSystem& system);
void reset(UoroState& state, const UnrolledSystem& system);

// The perturbation drawn for antithetic pair `pair_index` at outer iteration
// `outer_iter` (the +epsilon of the pair). Exposed so tests can replay the
// exact noise schedule.
Vector pair_perturbation(const NoiseSpec& noise, const UnrolledSystem& system,
                         std::uint64_t outer_iter, int pair_index);

// Truncated antithetic ES on a K-step window. All particles restart from
// mean_state; afterwards mean_state is advanced by one unperturbed unroll.
GradientEstimate es_step(const UnrolledSystem& system, SystemState& mean_state,
                         const Vector& theta, int k_steps, const NoiseSpec& noise,
                         std::uint64_t outer_iter, int workers = 1);

// Persistent ES: particle states are retained between unrolls and each
// estimate weights the window loss by the particle's full perturbation
// accumulator (updated with the fresh perturbation before accumulation).
GradientEstimate pes_step(const UnrolledSystem& system, ParticleEnsemble& ensemble,
                          const Vector& theta, int k_steps, const NoiseSpec& noise,
                          std::uint64_t outer_iter, int workers = 1);

// PES with the current window's analytic gradient as a control variate:
// the unperturbed mean state is unrolled first and p = d(window loss)/d theta
// is computed by reverse accumulation; each particle contributes
// xi_pre * (L - eps^T p) with the accumulator read *before* the fresh
// perturbation is added, and p is added back to the normalized sum.
GradientEstimate pes_analytic_step(const UnrolledSystem& system, ParticleEnsemble& ensemble,
                                   SystemState& mean_state, const Vector& theta, int k_steps,
                                   const NoiseSpec& noise, std::uint64_t outer_iter,
                                   int workers = 1);

// Exact gradient of the K-step window, entering state treated as constant.
GradientEstimate tbptt_step(const UnrolledSystem& system, SystemState& state,
                            const Vector& theta, int k_steps);

// Forward-mode accumulation G <- H G + F per step; emits the summed
// per-step gradients (dL/ds) G + dL/dtheta over the window.
GradientEstimate rtrl_step(const UnrolledSystem& system, SystemState& state, RtrlState& jstate,
                           const Vector& theta, int k_steps);

// Rank-1 RTRL surrogate. Per step a Rademacher probe nu refreshes
//   s_tilde  <- rho0 * H s_tilde + rho1 * nu
//   theta_tilde <- theta_tilde / rho0 + (nu^T F)^T / rho1
// with norm-ratio rho's (guarded to 1 when a norm is < 1e-12), then the
// post-update factors produce (dL/ds . s_tilde) theta_tilde + dL/dtheta.
GradientEstimate uoro_step(const UnrolledSystem& system, SystemState& state, UoroState& jstate,
                           const Vector& theta, int k_steps, std::uint64_t seed);

}  // namespace ucgrad
