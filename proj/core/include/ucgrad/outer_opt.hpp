#pragma once

#include <optional>
#include <string>

#include "ucgrad/common.hpp"

namespace ucgrad {

enum class OptKind { Sgd, Adam };

OptKind opt_kind_from_string(const std::string& s);
std::string to_string(OptKind k);

struct OptimizerConfig {
  OptKind kind = OptKind::Adam;
  double lr = 1e-2;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eps = 1e-8;
  // per-coordinate clamp to [-clip, clip] applied before the update
  std::optional<double> clip;
};

struct OptimizerState {
  OptimizerConfig cfg;
  Vector m;
  Vector v;
  long t = 0;  // completed updates; bias correction uses t+1
};

OptimizerState make_optimizer(const OptimizerConfig& cfg, int param_dim);

// theta' = theta - lr * grad
Vector sgd_update(const Vector& theta, const Vector& grad, double lr);

// Adam with bias correction at t+1 and eps added outside the square root;
// updates the moments and counter in place.
Vector adam_update(OptimizerState& state, const Vector& theta, const Vector& grad);

// Applies optional clipping, dispatches on kind, advances state.
Vector apply_update(OptimizerState& state, const Vector& theta, const Vector& grad);

}  // namespace ucgrad
