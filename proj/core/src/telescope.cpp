#include "ucgrad/telescope.hpp"

#include <utility>

namespace ucgrad {

namespace {

class TelescopingSystem final : public UnrolledSystem {
 public:
  explicit TelescopingSystem(std::shared_ptr<const UnrolledSystem> inner)
      : inner_(std::move(inner)) {}

  int horizon() const override { return inner_->horizon(); }
  int state_dim() const override { return inner_->state_dim() + 1; }
  int param_dim() const override { return inner_->param_dim(); }
  Vector init_params() const override { return inner_->init_params(); }

  SystemState init_state() const override {
    SystemState s0 = inner_->init_state();
    SystemState s;
    s.step_index = s0.step_index;
    s.values.resize(s0.values.size() + 1);
    s.values.head(s0.values.size()) = s0.values;
    s.values[s0.values.size()] = 0.0;  // L_{-1} convention
    return s;
  }

  StepResult step(const SystemState& state, const Vector& theta) const override {
    const Eigen::Index n = state.values.size() - 1;
    SystemState inner_state{state.values.head(n), state.step_index};
    StepResult r = inner_->step(inner_state, theta);
    const double prev_loss = state.values[n];
    StepResult out;
    out.loss = r.loss - prev_loss;
    out.state.step_index = r.state.step_index;
    out.state.values.resize(n + 1);
    out.state.values.head(n) = r.state.values;
    out.state.values[n] = r.loss;
    return out;
  }

 private:
  std::shared_ptr<const UnrolledSystem> inner_;
};

}  // namespace

std::shared_ptr<const UnrolledSystem> telescope(std::shared_ptr<const UnrolledSystem> inner) {
  return std::make_shared<TelescopingSystem>(std::move(inner));
}

}  // namespace ucgrad
