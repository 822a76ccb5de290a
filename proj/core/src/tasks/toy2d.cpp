#include <cmath>

#include "ucgrad/tasks.hpp"

namespace ucgrad::tasks {

namespace {
double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

Toy2dRegressionTask::Toy2dRegressionTask(int horizon, Vector theta0) : horizon_(horizon) {
  if (horizon < 1) throw ConfigError("toy2d.horizon: must be >= 1");
  if (theta0.size() == 0) {
    theta0_ = Vector::Constant(2, std::log(0.01));
  } else {
    if (theta0.size() != 2) throw ConfigError("toy2d.theta0: expected 2 values");
    theta0_ = std::move(theta0);
  }
}

double Toy2dRegressionTask::inner_loss(const Vector& x) {
  return std::sqrt(x[0] * x[0] + 5.0) - std::sqrt(5.0) +
         std::sin(x[1]) * std::sin(x[1]) * std::exp(-5.0 * x[0] * x[0]) +
         0.25 * std::abs(x[1] - 100.0);
}

Vector Toy2dRegressionTask::inner_grad(const Vector& x) {
  const double e = std::exp(-5.0 * x[0] * x[0]);
  Vector g(2);
  g[0] = x[0] / std::sqrt(x[0] * x[0] + 5.0) +
         std::sin(x[1]) * std::sin(x[1]) * (-10.0 * x[0]) * e;
  g[1] = std::sin(2.0 * x[1]) * e + 0.25 * sign0(x[1] - 100.0);
  return g;
}

Matrix Toy2dRegressionTask::inner_hessian(const Vector& x) {
  const double e = std::exp(-5.0 * x[0] * x[0]);
  const double s2 = std::sin(x[1]) * std::sin(x[1]);
  Matrix h(2, 2);
  h(0, 0) = 5.0 / std::pow(x[0] * x[0] + 5.0, 1.5) + s2 * e * (100.0 * x[0] * x[0] - 10.0);
  h(0, 1) = std::sin(2.0 * x[1]) * (-10.0 * x[0]) * e;
  h(1, 0) = h(0, 1);
  h(1, 1) = 2.0 * std::cos(2.0 * x[1]) * e;
  return h;
}

double Toy2dRegressionTask::learning_rate(int t, const Vector& theta) const {
  const double T = static_cast<double>(horizon_);
  return std::exp(theta[0]) * (T - t) / T + std::exp(theta[1]) * t / T;
}

SystemState Toy2dRegressionTask::init_state() const {
  return SystemState{Vector::Ones(2), 0};
}

StepResult Toy2dRegressionTask::step(const SystemState& state, const Vector& theta) const {
  const int t = state.step_index;
  const double lr = learning_rate(t, theta);
  StepResult r;
  r.state.values = state.values - lr * inner_grad(state.values);
  r.state.step_index = t + 1;
  // unroll() never steps past the horizon, so the gate is always open; kept
  // to mirror the task definition
  r.loss = inner_loss(r.state.values) * (t < horizon_ ? 1.0 : 0.0);
  return r;
}

Matrix Toy2dRegressionTask::jac_state(const SystemState& state, const Vector& theta) const {
  const double lr = learning_rate(state.step_index, theta);
  return Matrix::Identity(2, 2) - lr * inner_hessian(state.values);
}

Matrix Toy2dRegressionTask::jac_param(const SystemState& state, const Vector& theta) const {
  const int t = state.step_index;
  const double T = static_cast<double>(horizon_);
  const Vector g = inner_grad(state.values);
  Matrix f(2, 2);
  f.col(0) = -g * (std::exp(theta[0]) * (T - t) / T);
  f.col(1) = -g * (std::exp(theta[1]) * t / T);
  return f;
}

LossGrads Toy2dRegressionTask::loss_grads(const SystemState& post_step, const Vector&) const {
  LossGrads lg;
  lg.d_state = inner_grad(post_step.values);
  lg.d_theta = Vector::Zero(2);
  return lg;
}

bool Toy2dRegressionTask::fd_safe_state(const SystemState& state) const {
  return std::abs(state.values[1] - 100.0) > 1e-6;
}

}  // namespace ucgrad::tasks
