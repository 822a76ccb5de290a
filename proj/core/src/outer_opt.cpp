#include "ucgrad/outer_opt.hpp"

#include <cmath>

namespace ucgrad {

OptKind opt_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptKind::Sgd;
  if (s == "adam") return OptKind::Adam;
  throw ConfigError("outer.optimizer: unknown kind '" + s + "' (expected sgd|adam)");
}

std::string to_string(OptKind k) { return k == OptKind::Sgd ? "sgd" : "adam"; }

OptimizerState make_optimizer(const OptimizerConfig& cfg, int param_dim) {
  OptimizerState s;
  s.cfg = cfg;
  s.m = Vector::Zero(param_dim);
  s.v = Vector::Zero(param_dim);
  s.t = 0;
  return s;
}

namespace {
void check_grad(const Vector& grad) {
  if (!grad.allFinite()) throw NonFiniteError("optimizer update: non-finite gradient");
}
}  // namespace

Vector sgd_update(const Vector& theta, const Vector& grad, double lr) {
  check_grad(grad);
  return theta - lr * grad;
}

Vector adam_update(OptimizerState& state, const Vector& theta, const Vector& grad) {
  check_grad(grad);
  const auto& c = state.cfg;
  state.m = (1.0 - c.beta1) * grad + c.beta1 * state.m;
  state.v = (1.0 - c.beta2) * grad.cwiseProduct(grad) + c.beta2 * state.v;
  const double t1 = static_cast<double>(state.t + 1);
  const Vector mhat = state.m / (1.0 - std::pow(c.beta1, t1));
  const Vector vhat = state.v / (1.0 - std::pow(c.beta2, t1));
  state.t += 1;
  return theta - c.lr * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                           Vector::Constant(theta.size(), c.eps));
}

Vector apply_update(OptimizerState& state, const Vector& theta, const Vector& grad) {
  check_grad(grad);
  Vector g = grad;
  if (state.cfg.clip) {
    const double c = *state.cfg.clip;
    g = g.cwiseMax(-c).cwiseMin(c);
  }
  if (state.cfg.kind == OptKind::Sgd) {
    state.t += 1;
    return sgd_update(theta, g, state.cfg.lr);
  }
  return adam_update(state, theta, g);
}

}  // namespace ucgrad
