#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ucgrad/system.hpp"

namespace ucgrad::tasks {

using KeyValues = std::map<std::string, std::string>;

// Chain of n units, each averaging itself and its right neighbour, driven by
// p positive and n-p negative copies of a scalar parameter; the loss tracks
// the first unit against 1. Short unrolls see only the direct positive
// injection while the dominant influence arrives through the chain, which is
// what makes truncated gradients unreliable here.
class InfluenceBalancingTask final : public UnrolledSystem {
 public:
  explicit InfluenceBalancingTask(int horizon = 100, int n = 23, int n_positive = 10);

  int horizon() const override { return horizon_; }
  int state_dim() const override { return n_; }
  int param_dim() const override { return 1; }
  SystemState init_state() const override;
  Vector init_params() const override;
  StepResult step(const SystemState& state, const Vector& theta) const override;
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState& state, const Vector& theta) const override;
  Matrix jac_param(const SystemState& state, const Vector& theta) const override;
  LossGrads loss_grads(const SystemState& post_step, const Vector& theta) const override;

 private:
  int horizon_;
  int n_;
  Matrix A_;
  Vector signs_;
};

// 2-D inner problem descended by gradient steps whose learning rate
// interpolates between exp(theta0) and exp(theta1) across the horizon; the
// per-step loss is the inner objective at the post-update iterate. Jacobians
// are hand-derived (the |x1 - 100| term has a measure-zero kink whose
// subgradient is taken as 0).
class Toy2dRegressionTask final : public UnrolledSystem {
 public:
  explicit Toy2dRegressionTask(int horizon = 100, Vector theta0 = Vector());

  int horizon() const override { return horizon_; }
  int state_dim() const override { return 2; }
  int param_dim() const override { return 2; }
  SystemState init_state() const override;
  Vector init_params() const override { return theta0_; }
  StepResult step(const SystemState& state, const Vector& theta) const override;
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState& state, const Vector& theta) const override;
  Matrix jac_param(const SystemState& state, const Vector& theta) const override;
  LossGrads loss_grads(const SystemState& post_step, const Vector& theta) const override;
  bool fd_safe_state(const SystemState& state) const override;

  static double inner_loss(const Vector& x);
  static Vector inner_grad(const Vector& x);
  static Matrix inner_hessian(const Vector& x);
  double learning_rate(int t, const Vector& theta) const;

 private:
  int horizon_;
  Vector theta0_;
};

enum class Scenario { DiagIdentical, DiagIid, UpperTriIdentical, UpperTriIid };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

// Linear per-step losses with an exactly controlled gradient matrix
// M[tau, t] = grad_{theta_tau} L_t. Diagonal scenarios depend only on the
// parameters applied in the current step; upper-triangular ones read a
// running parameter sum carried in the state. The closed-form total gradient
// has the requested norm.
class QuadraticScenarioTask final : public UnrolledSystem {
 public:
  QuadraticScenarioTask(Scenario scenario, int param_dim, int horizon, double g_norm = 1.0);

  int horizon() const override { return horizon_; }
  int state_dim() const override { return state_dim_; }
  int param_dim() const override { return param_dim_; }
  SystemState init_state() const override;
  StepResult step(const SystemState& state, const Vector& theta) const override;
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState& state, const Vector& theta) const override;
  Matrix jac_param(const SystemState& state, const Vector& theta) const override;
  LossGrads loss_grads(const SystemState& post_step, const Vector& theta) const override;
  std::optional<Vector> analytic_gradient(const Vector& theta) const override;

  Scenario scenario() const { return scenario_; }
  // the constant per-entry gradient vector of the realized M
  const Vector& entry_gradient() const { return entry_; }

 private:
  bool diagonal() const;
  Scenario scenario_;
  int param_dim_;
  int horizon_;
  int state_dim_;
  Vector entry_;
};

// Genuinely quadratic total loss with cross-step curvature: the state is a
// running parameter sum w and each step costs 1/2 ||B w||^2. Exercises the
// quadratic-unbiasedness statement with a nonzero Hessian across steps.
class CoupledQuadraticTask final : public UnrolledSystem {
 public:
  CoupledQuadraticTask(int param_dim, int horizon);

  int horizon() const override { return horizon_; }
  int state_dim() const override { return param_dim_; }
  int param_dim() const override { return param_dim_; }
  SystemState init_state() const override;
  Vector init_params() const override;
  StepResult step(const SystemState& state, const Vector& theta) const override;
  bool has_jacobians() const override { return true; }
  Matrix jac_state(const SystemState& state, const Vector& theta) const override;
  Matrix jac_param(const SystemState& state, const Vector& theta) const override;
  LossGrads loss_grads(const SystemState& post_step, const Vector& theta) const override;
  std::optional<Vector> analytic_gradient(const Vector& theta) const override;

 private:
  int param_dim_;
  int horizon_;
  Matrix B_;
  Vector w0_;
};

struct Dataset {
  Matrix inputs;                // n x d, features in [0,1] for image data
  std::vector<int> labels;      // n
  int n_classes = 0;
};

// Seed-fixed two-Gaussians classification set; keeps the MLP task runnable
// with no external files.
Dataset make_two_gaussians(int n_points, std::uint64_t seed);

// TrainLoss: the minibatch loss driving each step. ValAccuracy: validation
// error rate at the post-update weights (non-differentiable target).
// FixedBatchLoss: loss on one batch held fixed for the whole inner problem,
// evaluated at the post-update weights; combine with telescope() to target
// the final loss.
enum class MetaObjective { TrainLoss, ValAccuracy, FixedBatchLoss };

struct MlpTaskConfig {
  int horizon = 1000;
  std::vector<int> hidden = {8};
  int batch_size = 100;
  double momentum = 0.9;
  double q_constant = 5000.0;  // Q in alpha_t = th0 / (1 + t/Q)^th1
  bool log_space = true;       // theta are (log th0, log th1)
  MetaObjective objective = MetaObjective::TrainLoss;
  std::uint64_t init_seed = 0;
  double train_fraction = 0.8;
};

// Tiny MLP trained by momentum-SGD under a decaying learning-rate schedule;
// the outer parameters are the schedule's initial rate and decay factor.
// Zeroth-order only (no meta-Jacobians), so it exercises the ES/PES path.
class LrDecayMlpTask final : public UnrolledSystem {
 public:
  LrDecayMlpTask(Dataset dataset, MlpTaskConfig config);

  int horizon() const override { return cfg_.horizon; }
  int state_dim() const override { return 2 * n_weights_; }
  int param_dim() const override { return 2; }
  SystemState init_state() const override;
  Vector init_params() const override;
  StepResult step(const SystemState& state, const Vector& theta) const override;

  double learning_rate(int t, const Vector& theta) const;
  int n_weights() const { return n_weights_; }

 private:
  double batch_loss_and_grad(const Vector& w, int batch_index, Vector* grad) const;
  double validation_error(const Vector& w) const;

  Dataset data_;
  MlpTaskConfig cfg_;
  std::vector<int> layer_sizes_;
  int n_weights_ = 0;
  int n_train_ = 0;
  int n_batches_ = 0;
  Vector w_init_;
};

// Builds a task by name: influence_balancing | toy2d | quadratic | cumquad |
// mlp_lr_decay. Unknown names or malformed values raise ConfigError naming
// the offending key.
std::unique_ptr<UnrolledSystem> make_task(const std::string& name, const KeyValues& config);

}  // namespace ucgrad::tasks
