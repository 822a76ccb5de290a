#include <cmath>

#include "ucgrad/tasks.hpp"

namespace ucgrad::tasks {

InfluenceBalancingTask::InfluenceBalancingTask(int horizon, int n, int n_positive)
    : horizon_(horizon), n_(n) {
  if (horizon < 1) throw ConfigError("influence_balancing.horizon: must be >= 1");
  if (n < 2 || n_positive < 0 || n_positive > n)
    throw ConfigError("influence_balancing: need n >= 2 and 0 <= n_positive <= n");
  A_ = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A_(i, i) = 0.5;
    if (i + 1 < n) A_(i, i + 1) = 0.5;
  }
  signs_ = Vector::Ones(n);
  for (int i = n_positive; i < n; ++i) signs_[i] = -1.0;
}

SystemState InfluenceBalancingTask::init_state() const {
  return SystemState{Vector::Ones(n_), 0};
}

Vector InfluenceBalancingTask::init_params() const {
  return Vector::Constant(1, 0.5);
}

StepResult InfluenceBalancingTask::step(const SystemState& state, const Vector& theta) const {
  StepResult r;
  r.state.values = A_ * state.values + signs_ * theta[0];
  r.state.step_index = state.step_index + 1;
  const double d = r.state.values[0] - 1.0;
  r.loss = 0.5 * d * d;
  return r;
}

Matrix InfluenceBalancingTask::jac_state(const SystemState&, const Vector&) const { return A_; }

Matrix InfluenceBalancingTask::jac_param(const SystemState&, const Vector&) const {
  return signs_;
}

LossGrads InfluenceBalancingTask::loss_grads(const SystemState& post_step, const Vector&) const {
  LossGrads lg;
  lg.d_state = Vector::Zero(n_);
  lg.d_state[0] = post_step.values[0] - 1.0;
  lg.d_theta = Vector::Zero(1);
  return lg;
}

}  // namespace ucgrad::tasks
