#include "ucgrad/system.hpp"

#include <cmath>

namespace ucgrad {

Matrix UnrolledSystem::jac_state(const SystemState&, const Vector&) const {
  throw CapabilityError("jac_state: system does not provide Jacobians");
}

Matrix UnrolledSystem::jac_param(const SystemState&, const Vector&) const {
  throw CapabilityError("jac_param: system does not provide Jacobians");
}

LossGrads UnrolledSystem::loss_grads(const SystemState&, const Vector&) const {
  throw CapabilityError("loss_grads: system does not provide Jacobians");
}

UnrollResult unroll(const UnrolledSystem& system, SystemState state, const Vector& theta,
                    int k_steps, bool retain_losses) {
  if (k_steps < 1) throw HorizonError("unroll: k_steps must be >= 1, got " + std::to_string(k_steps));
  if (state.step_index + k_steps > system.horizon()) {
    throw HorizonError("unroll: step_index " + std::to_string(state.step_index) + " + K " +
                       std::to_string(k_steps) + " exceeds horizon T " +
                       std::to_string(system.horizon()));
  }
  UnrollResult out;
  if (retain_losses) out.per_step_losses.reserve(static_cast<size_t>(k_steps));
  double sum = 0.0;
  for (int k = 0; k < k_steps; ++k) {
    StepResult r = system.step(state, theta);
    if (!std::isfinite(r.loss)) {
      throw NonFiniteError("unroll: non-finite loss at step " + std::to_string(state.step_index + 1));
    }
    state = std::move(r.state);
    sum += r.loss;
    if (retain_losses) out.per_step_losses.push_back(r.loss);
  }
  out.final_state = std::move(state);
  out.loss_sum = sum;
  return out;
}

}  // namespace ucgrad
