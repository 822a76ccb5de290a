#pragma once

// Small systems used only by the tests; they stay independent of the task
// implementations they are used to check.

#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "ucgrad/system.hpp"

namespace ucgrad::testsys {

// s_{t+1} = a s_t + theta[0], L_t = s_t ; S = P = 1.
class LinearScalarSystem final : public UnrolledSystem {
 public:
  LinearScalarSystem(double a, int horizon, double s0 = 0.0) : a_(a), horizon_(horizon), s0_(s0) {}

  int horizon() const override { return horizon_; }
  int state_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  SystemState init_state() const override { return {Vector::Constant(1, s0_), 0}; }
  Vector init_params() const override { return Vector::Constant(1, 1.0); }

  StepResult step(const SystemState& s, const Vector& theta) const override {
    StepResult r;
    r.state.values = Vector::Constant(1, a_ * s.values[0] + theta[0]);
    r.state.step_index = s.step_index + 1;
    r.loss = r.state.values[0];
    return r;
  }
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState&, const Vector&) const override {
    return Matrix::Constant(1, 1, a_);
  }
  Matrix jac_param(const SystemState&, const Vector&) const override {
    return Matrix::Constant(1, 1, 1.0);
  }
  LossGrads loss_grads(const SystemState&, const Vector&) const override {
    return {Vector::Constant(1, 1.0), Vector::Zero(1)};
  }

 private:
  double a_;
  int horizon_;
  double s0_;
};

// Emits a prescribed loss sequence; state is a step counter.
class FixedLossSystem final : public UnrolledSystem {
 public:
  explicit FixedLossSystem(std::vector<double> losses) : losses_(std::move(losses)) {}

  int horizon() const override { return static_cast<int>(losses_.size()); }
  int state_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  SystemState init_state() const override { return {Vector::Zero(1), 0}; }

  StepResult step(const SystemState& s, const Vector&) const override {
    StepResult r;
    r.state.values = Vector::Constant(1, static_cast<double>(s.step_index + 1));
    r.state.step_index = s.step_index + 1;
    r.loss = losses_[static_cast<size_t>(s.step_index)];
    return r;
  }

 private:
  std::vector<double> losses_;
};

// theta has no influence at all: s' = 0.5 s, L = s^2, F = 0, dL/dtheta = 0.
class ZeroEffectSystem final : public UnrolledSystem {
 public:
  explicit ZeroEffectSystem(int horizon, int param_dim = 2)
      : horizon_(horizon), param_dim_(param_dim) {}

  int horizon() const override { return horizon_; }
  int state_dim() const override { return 1; }
  int param_dim() const override { return param_dim_; }
  SystemState init_state() const override { return {Vector::Constant(1, 1.0), 0}; }

  StepResult step(const SystemState& s, const Vector&) const override {
    StepResult r;
    r.state.values = 0.5 * s.values;
    r.state.step_index = s.step_index + 1;
    r.loss = r.state.values[0] * r.state.values[0];
    return r;
  }
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState&, const Vector&) const override {
    return Matrix::Constant(1, 1, 0.5);
  }
  Matrix jac_param(const SystemState&, const Vector&) const override {
    return Matrix::Zero(1, param_dim_);
  }
  LossGrads loss_grads(const SystemState& post, const Vector&) const override {
    return {Vector::Constant(1, 2.0 * post.values[0]), Vector::Zero(param_dim_)};
  }

 private:
  int horizon_;
  int param_dim_;
};

// Fully decoupled loss L_t = c . theta with zero Jacobians everywhere.
class DirectLossSystem final : public UnrolledSystem {
 public:
  DirectLossSystem(Vector coeffs, int horizon) : c_(std::move(coeffs)), horizon_(horizon) {}

  int horizon() const override { return horizon_; }
  int state_dim() const override { return 1; }
  int param_dim() const override { return static_cast<int>(c_.size()); }
  SystemState init_state() const override { return {Vector::Zero(1), 0}; }

  StepResult step(const SystemState& s, const Vector& theta) const override {
    return {{s.values, s.step_index + 1}, c_.dot(theta)};
  }
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState&, const Vector&) const override { return Matrix::Zero(1, 1); }
  Matrix jac_param(const SystemState&, const Vector&) const override {
    return Matrix::Zero(1, c_.size());
  }
  LossGrads loss_grads(const SystemState&, const Vector&) const override {
    return {Vector::Zero(1), c_};
  }

 private:
  Vector c_;
  int horizon_;
};

// Diverges on purpose: loss is +inf from step `bad_step` on.
class DivergingSystem final : public UnrolledSystem {
 public:
  DivergingSystem(int horizon, int bad_step) : horizon_(horizon), bad_step_(bad_step) {}

  int horizon() const override { return horizon_; }
  int state_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  SystemState init_state() const override { return {Vector::Zero(1), 0}; }

  StepResult step(const SystemState& s, const Vector&) const override {
    StepResult r;
    r.state.values = s.values;
    r.state.step_index = s.step_index + 1;
    r.loss = r.state.step_index >= bad_step_ ? std::numeric_limits<double>::infinity() : 0.0;
    return r;
  }

 private:
  int horizon_;
  int bad_step_;
};

// Multiplies the wrapped system's losses by a constant.
class ScaledLossSystem final : public UnrolledSystem {
 public:
  ScaledLossSystem(std::shared_ptr<const UnrolledSystem> inner, double scale)
      : inner_(std::move(inner)), scale_(scale) {}

  int horizon() const override { return inner_->horizon(); }
  int state_dim() const override { return inner_->state_dim(); }
  int param_dim() const override { return inner_->param_dim(); }
  SystemState init_state() const override { return inner_->init_state(); }
  Vector init_params() const override { return inner_->init_params(); }

  StepResult step(const SystemState& s, const Vector& theta) const override {
    StepResult r = inner_->step(s, theta);
    r.loss *= scale_;
    return r;
  }
  bool has_jacobians() const override { return inner_->has_jacobians(); }
  Matrix jac_state(const SystemState& s, const Vector& t) const override {
    return inner_->jac_state(s, t);
  }
  Matrix jac_param(const SystemState& s, const Vector& t) const override {
    return inner_->jac_param(s, t);
  }
  LossGrads loss_grads(const SystemState& s, const Vector& t) const override {
    LossGrads lg = inner_->loss_grads(s, t);
    lg.d_state *= scale_;
    lg.d_theta *= scale_;
    return lg;
  }

 private:
  std::shared_ptr<const UnrolledSystem> inner_;
  double scale_;
};

}  // namespace ucgrad::testsys
