#include "ucgrad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ucgrad/backprop.hpp"

namespace ucgrad {

namespace {

double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

double max_rel_err(const Matrix& got, const Matrix& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.rows(); ++i)
    for (Eigen::Index j = 0; j < got.cols(); ++j)
      worst = std::max(worst, rel_err(got(i, j), want(i, j)));
  return worst;
}

double unroll_loss(const UnrolledSystem& sys, const SystemState& s, const Vector& theta, int k) {
  return unroll(sys, s, theta, k).loss_sum;
}

}  // namespace

std::vector<GradCheckResult> gradcheck(const UnrolledSystem& system, const Vector& theta,
                                       const GradCheckOptions& opt) {
  std::vector<GradCheckResult> results;
  auto push = [&](const std::string& name, double err) {
    results.push_back({name, err, opt.tolerance, err <= opt.tolerance});
  };

  const int T = system.horizon();
  const int P = system.param_dim();
  const int S = system.state_dim();

  // full-horizon gradient vs central differences on the total loss
  {
    const Vector g = full_gradient(system, theta);
    double worst = 0.0;
    for (int j = 0; j < P; ++j) {
      const double h = opt.fd_scale * (1.0 + std::abs(theta[j]));
      Vector tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (unroll_loss(system, system.init_state(), tp, T) -
           unroll_loss(system, system.init_state(), tm, T)) /
          (2.0 * h);
      worst = std::max(worst, rel_err(g[j], fd));
    }
    push("full_gradient", worst);
  }

  // probe states spread along the unperturbed trajectory
  std::vector<SystemState> probes;
  {
    SystemState s = system.init_state();
    const int n = std::max(1, opt.n_probe_states);
    int next_probe = 0;
    for (int t = 0; t < T && static_cast<int>(probes.size()) < n; ++t) {
      if (t == next_probe) {
        probes.push_back(s);
        next_probe += std::max(1, T / n);
      }
      s = system.step(s, theta).state;
    }
  }

  double worst_H = 0.0, worst_F = 0.0, worst_window = 0.0, worst_dstate = 0.0;
  int checked = 0;
  for (const SystemState& s : probes) {
    const SystemState post = system.step(s, theta).state;
    if (!system.fd_safe_state(s) || !system.fd_safe_state(post)) continue;
    ++checked;

    const Matrix H = system.jac_state(s, theta);
    Matrix H_fd(S, S);
    for (int k = 0; k < S; ++k) {
      const double h = opt.fd_scale * (1.0 + std::abs(s.values[k]));
      SystemState sp = s, sm = s;
      sp.values[k] += h;
      sm.values[k] -= h;
      H_fd.col(k) = (system.step(sp, theta).state.values - system.step(sm, theta).state.values) /
                    (2.0 * h);
    }
    worst_H = std::max(worst_H, max_rel_err(H, H_fd));

    const Matrix F = system.jac_param(s, theta);
    Matrix F_fd(S, P);
    for (int j = 0; j < P; ++j) {
      const double h = opt.fd_scale * (1.0 + std::abs(theta[j]));
      Vector tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      F_fd.col(j) = (system.step(s, tp).state.values - system.step(s, tm).state.values) / (2.0 * h);
    }
    worst_F = std::max(worst_F, max_rel_err(F, F_fd));

    // d(one-step loss)/d(pre-state) = H^T dL/ds, validating loss_grads.d_state
    {
      const Vector want = H.transpose() * system.loss_grads(post, theta).d_state;
      Vector got(S);
      for (int k = 0; k < S; ++k) {
        const double h = opt.fd_scale * (1.0 + std::abs(s.values[k]));
        SystemState sp = s, sm = s;
        sp.values[k] += h;
        sm.values[k] -= h;
        got[k] = (system.step(sp, theta).loss - system.step(sm, theta).loss) / (2.0 * h);
      }
      worst_dstate = std::max(worst_dstate, max_rel_err(got, want));
    }

    // short-window reverse accumulation vs FD over theta
    {
      const int k_win = std::min(2, T - s.step_index);
      const Vector g = window_gradient(system, s, theta, k_win).grad;
      double worst = 0.0;
      for (int j = 0; j < P; ++j) {
        const double h = opt.fd_scale * (1.0 + std::abs(theta[j]));
        Vector tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        const double fd = (unroll_loss(system, s, tp, k_win) - unroll_loss(system, s, tm, k_win)) /
                          (2.0 * h);
        worst = std::max(worst, rel_err(g[j], fd));
      }
      worst_window = std::max(worst_window, worst);
    }
  }

  if (checked > 0) {
    push("jac_state", worst_H);
    push("jac_param", worst_F);
    push("loss_state_grad", worst_dstate);
    push("window_gradient", worst_window);
  }
  return results;
}

bool all_passed(const std::vector<GradCheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

}  // namespace ucgrad
