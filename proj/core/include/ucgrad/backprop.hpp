#pragma once

#include "ucgrad/system.hpp"

namespace ucgrad {

struct WindowGradient {
  Vector grad;              // d(window loss sum)/d theta, entering state held fixed
  SystemState final_state;  // state after the window
  double loss_sum = 0.0;
};

// Reverse accumulation over a K-step window via the task-supplied Jacobians.
// Requires has_jacobians().
WindowGradient window_gradient(const UnrolledSystem& system, const SystemState& state,
                               const Vector& theta, int k_steps);

// Exact d(sum of losses)/d theta over the full horizon from init_state();
// ground-truth oracle for the estimator tests.
Vector full_gradient(const UnrolledSystem& system, const Vector& theta);

}  // namespace ucgrad
