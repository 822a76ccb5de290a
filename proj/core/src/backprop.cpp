#include "ucgrad/backprop.hpp"

#include <cmath>
#include <vector>

namespace ucgrad {

WindowGradient window_gradient(const UnrolledSystem& system, const SystemState& state,
                               const Vector& theta, int k_steps) {
  if (!system.has_jacobians())
    throw CapabilityError("window_gradient: system does not provide Jacobians");
  if (k_steps < 1)
    throw HorizonError("window_gradient: k_steps must be >= 1, got " + std::to_string(k_steps));
  if (state.step_index + k_steps > system.horizon())
    throw HorizonError("window_gradient: step_index " + std::to_string(state.step_index) + " + K " +
                       std::to_string(k_steps) + " exceeds horizon T " +
                       std::to_string(system.horizon()));

  // forward pass, storing s_0..s_K
  std::vector<SystemState> states;
  states.reserve(static_cast<size_t>(k_steps) + 1);
  states.push_back(state);
  double loss_sum = 0.0;
  for (int k = 0; k < k_steps; ++k) {
    StepResult r = system.step(states.back(), theta);
    if (!std::isfinite(r.loss))
      throw NonFiniteError("window_gradient: non-finite loss at step " +
                           std::to_string(states.back().step_index + 1));
    loss_sum += r.loss;
    states.push_back(std::move(r.state));
  }

  // reverse pass: lambda = d(remaining window loss)/d s_i
  const int P = system.param_dim();
  Vector grad = Vector::Zero(P);
  RowVector lambda = RowVector::Zero(system.state_dim());
  for (int i = k_steps; i >= 1; --i) {
    const LossGrads lg = system.loss_grads(states[static_cast<size_t>(i)], theta);
    lambda += lg.d_state.transpose();
    grad.noalias() += (lambda * system.jac_param(states[static_cast<size_t>(i - 1)], theta)).transpose();
    grad += lg.d_theta;
    if (i > 1) lambda = lambda * system.jac_state(states[static_cast<size_t>(i - 1)], theta);
  }

  WindowGradient out;
  out.grad = std::move(grad);
  out.final_state = std::move(states.back());
  out.loss_sum = loss_sum;
  return out;
}

Vector full_gradient(const UnrolledSystem& system, const Vector& theta) {
  return window_gradient(system, system.init_state(), theta, system.horizon()).grad;
}

}  // namespace ucgrad
