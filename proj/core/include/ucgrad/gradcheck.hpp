#pragma once

#include <string>
#include <vector>

#include "ucgrad/system.hpp"

namespace ucgrad {

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  // central differences use h = fd_scale * (1 + |x|)
  double fd_scale = 1e-5;
  // states along the trajectory at which Jacobians are probed
  int n_probe_states = 3;
};

// Validates full_gradient and the task Jacobians (jac_state, jac_param,
// loss_grads) against central finite differences along the unperturbed
// trajectory from init_state(). States rejected by fd_safe_state are skipped.
std::vector<GradCheckResult> gradcheck(const UnrolledSystem& system, const Vector& theta,
                                       const GradCheckOptions& options = {});

bool all_passed(const std::vector<GradCheckResult>& results);

}  // namespace ucgrad
