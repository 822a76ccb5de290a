#include <cmath>

#include "ucgrad/tasks.hpp"

namespace ucgrad::tasks {

Scenario scenario_from_string(const std::string& s) {
  if (s == "diag_identical") return Scenario::DiagIdentical;
  if (s == "diag_iid") return Scenario::DiagIid;
  if (s == "uppertri_identical") return Scenario::UpperTriIdentical;
  if (s == "uppertri_iid") return Scenario::UpperTriIid;
  throw ConfigError("scenario: unknown '" + s +
                    "' (expected diag_identical|diag_iid|uppertri_identical|uppertri_iid)");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::DiagIdentical: return "diag_identical";
    case Scenario::DiagIid: return "diag_iid";
    case Scenario::UpperTriIdentical: return "uppertri_identical";
    case Scenario::UpperTriIid: return "uppertri_iid";
  }
  return "?";
}

bool QuadraticScenarioTask::diagonal() const {
  return scenario_ == Scenario::DiagIdentical || scenario_ == Scenario::DiagIid;
}

QuadraticScenarioTask::QuadraticScenarioTask(Scenario scenario, int param_dim, int horizon,
                                             double g_norm)
    : scenario_(scenario), param_dim_(param_dim), horizon_(horizon) {
  if (param_dim < 1) throw ConfigError("quadratic.P: must be >= 1");
  if (horizon < 1) throw ConfigError("quadratic.T: must be >= 1");
  if (!(g_norm > 0.0)) throw ConfigError("quadratic.g_norm: must be > 0");
  const double T = static_cast<double>(horizon);
  // entries share a fixed direction; only the magnitude convention differs
  const Vector unit = Vector::Ones(param_dim) / std::sqrt(static_cast<double>(param_dim));
  double scale = 0.0;
  switch (scenario) {
    case Scenario::DiagIdentical: scale = g_norm / T; break;
    case Scenario::DiagIid: scale = g_norm / std::sqrt(T); break;
    case Scenario::UpperTriIdentical: scale = 2.0 * g_norm / (T * (T + 1.0)); break;
    case Scenario::UpperTriIid: scale = std::sqrt(2.0 / (T * (T + 1.0))) * g_norm; break;
  }
  entry_ = scale * unit;
  state_dim_ = diagonal() ? 1 : param_dim;
}

SystemState QuadraticScenarioTask::init_state() const {
  return SystemState{Vector::Zero(state_dim_), 0};
}

StepResult QuadraticScenarioTask::step(const SystemState& state, const Vector& theta) const {
  StepResult r;
  r.state.step_index = state.step_index + 1;
  if (diagonal()) {
    r.state.values = state.values;
    r.loss = entry_.dot(theta);
  } else {
    r.state.values = state.values + theta;
    r.loss = entry_.dot(r.state.values);
  }
  return r;
}

Matrix QuadraticScenarioTask::jac_state(const SystemState&, const Vector&) const {
  // the diagonal dummy state is copied through the step
  if (diagonal()) return Matrix::Identity(1, 1);
  return Matrix::Identity(param_dim_, param_dim_);
}

Matrix QuadraticScenarioTask::jac_param(const SystemState&, const Vector&) const {
  if (diagonal()) return Matrix::Zero(1, param_dim_);
  return Matrix::Identity(param_dim_, param_dim_);
}

LossGrads QuadraticScenarioTask::loss_grads(const SystemState&, const Vector&) const {
  LossGrads lg;
  if (diagonal()) {
    lg.d_state = Vector::Zero(1);
    lg.d_theta = entry_;
  } else {
    lg.d_state = entry_;
    lg.d_theta = Vector::Zero(param_dim_);
  }
  return lg;
}

std::optional<Vector> QuadraticScenarioTask::analytic_gradient(const Vector&) const {
  const double T = static_cast<double>(horizon_);
  if (diagonal()) return Vector(T * entry_);
  return Vector(T * (T + 1.0) / 2.0 * entry_);
}

CoupledQuadraticTask::CoupledQuadraticTask(int param_dim, int horizon)
    : param_dim_(param_dim), horizon_(horizon) {
  if (param_dim < 1) throw ConfigError("cumquad.P: must be >= 1");
  if (horizon < 1) throw ConfigError("cumquad.T: must be >= 1");
  // fixed well-conditioned curvature and a nonzero starting sum
  B_ = Matrix::Identity(param_dim, param_dim);
  for (int i = 0; i < param_dim; ++i) {
    B_(i, i) = 1.0 + 0.1 * i;
    if (i + 1 < param_dim) B_(i, i + 1) = 0.2;
  }
  w0_ = Vector(param_dim);
  for (int i = 0; i < param_dim; ++i) w0_[i] = (i % 2 == 0) ? 1.0 : -1.0;
}

SystemState CoupledQuadraticTask::init_state() const { return SystemState{w0_, 0}; }

Vector CoupledQuadraticTask::init_params() const {
  Vector t(param_dim_);
  for (int i = 0; i < param_dim_; ++i) t[i] = 0.3 - 0.1 * i;
  return t;
}

StepResult CoupledQuadraticTask::step(const SystemState& state, const Vector& theta) const {
  StepResult r;
  r.state.values = state.values + theta;
  r.state.step_index = state.step_index + 1;
  const Vector bw = B_ * r.state.values;
  r.loss = 0.5 * bw.squaredNorm();
  return r;
}

Matrix CoupledQuadraticTask::jac_state(const SystemState&, const Vector&) const {
  return Matrix::Identity(param_dim_, param_dim_);
}

Matrix CoupledQuadraticTask::jac_param(const SystemState&, const Vector&) const {
  return Matrix::Identity(param_dim_, param_dim_);
}

LossGrads CoupledQuadraticTask::loss_grads(const SystemState& post_step, const Vector&) const {
  LossGrads lg;
  lg.d_state = B_.transpose() * (B_ * post_step.values);
  lg.d_theta = Vector::Zero(param_dim_);
  return lg;
}

std::optional<Vector> CoupledQuadraticTask::analytic_gradient(const Vector& theta) const {
  // w_t = w0 + t theta; dL/dtheta = sum_t t B^T B w_t
  const double T = static_cast<double>(horizon_);
  const double sum_t = T * (T + 1.0) / 2.0;
  const double sum_t2 = T * (T + 1.0) * (2.0 * T + 1.0) / 6.0;
  return Vector(B_.transpose() * (B_ * (sum_t * w0_ + sum_t2 * theta)));
}

}  // namespace ucgrad::tasks
