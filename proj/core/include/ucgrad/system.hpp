#pragma once

#include <optional>
#include <vector>

#include "ucgrad/common.hpp"

namespace ucgrad {

// State of an unrolled system. step_index counts applied steps from the
// initial state and never exceeds the system horizon, so time-dependent
// systems (schedules, batch cursors) are pure functions of (state, theta).
struct SystemState {
  Vector values;
  int step_index = 0;
};

struct StepResult {
  SystemState state;
  double loss = 0.0;
};

// Gradients of the per-step loss at a post-step state: d_state = dL/ds
// (length S) and the direct parameter term d_theta = dL/dtheta (length P).
struct LossGrads {
  Vector d_state;
  Vector d_theta;
};

// A dynamical system s_t = f(s_{t-1}; theta) with per-step losses
// L_t(s_t; theta) summed over a horizon of T steps. Implementations must be
// deterministic given (state, theta) and immutable after construction, so
// distinct states may be unrolled concurrently.
class UnrolledSystem {
 public:
  virtual ~UnrolledSystem() = default;

  virtual int horizon() const = 0;    // T
  virtual int state_dim() const = 0;  // S
  virtual int param_dim() const = 0;  // P

  virtual SystemState init_state() const = 0;
  virtual StepResult step(const SystemState& state, const Vector& theta) const = 0;

  // Natural starting point for the outer parameters.
  virtual Vector init_params() const { return Vector::Zero(param_dim()); }

  virtual bool has_jacobians() const { return false; }
  // d s_t / d s_{t-1} at (state = s_{t-1}, theta); S x S
  virtual Matrix jac_state(const SystemState& state, const Vector& theta) const;
  // d s_t / d theta at (state = s_{t-1}, theta); S x P
  virtual Matrix jac_param(const SystemState& state, const Vector& theta) const;
  // gradients of L_t evaluated at the post-step state s_t
  virtual LossGrads loss_grads(const SystemState& post_step, const Vector& theta) const;

  // Closed-form full-horizon gradient, when the task has one.
  virtual std::optional<Vector> analytic_gradient(const Vector& theta) const {
    (void)theta;
    return std::nullopt;
  }

  // Finite differencing may need to avoid kinks (e.g. |x|-terms). States for
  // which this returns false are skipped by gradient checks.
  virtual bool fd_safe_state(const SystemState& state) const {
    (void)state;
    return true;
  }
};

struct UnrollResult {
  SystemState final_state;
  double loss_sum = 0.0;
  // filled only when requested; loss_sum is their left-to-right sum
  std::vector<double> per_step_losses;
};

// Applies step() k_steps times from `state`, accumulating losses
// left-to-right. Throws HorizonError when the window would pass the horizon
// and NonFiniteError (naming the step) when a loss diverges.
UnrollResult unroll(const UnrolledSystem& system, SystemState state, const Vector& theta,
                    int k_steps, bool retain_losses = false);

}  // namespace ucgrad
