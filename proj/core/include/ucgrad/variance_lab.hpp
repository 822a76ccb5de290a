#pragma once

#include <optional>
#include <string>

#include "ucgrad/estimators.hpp"
#include "ucgrad/tasks.hpp"

namespace ucgrad {

enum class EstimatorKind { Es, Pes, PesAnalytic, Tbptt, Rtrl, Uoro };

EstimatorKind estimator_from_string(const std::string& s);
std::string to_string(EstimatorKind k);

struct VarianceReport {
  double total_variance = 0.0;  // tr Var(ghat) over accumulated full-problem estimates
  double normalized = 0.0;      // total_variance / ||g_true||^2
  long n_trials = 0;
  double standard_error = 0.0;  // of total_variance, via batched trials
  Vector per_coordinate;        // per-coordinate sample variances
  Vector mean_estimate;
  std::string ground_truth_provenance;  // analytic | full_gradient | es_smoothed
  bool leading_order_flag = false;      // set for scenarios pinned only to leading order
};

// Ground truth for normalization. `gradient` is the best exact route (the
// task's closed form when present, else reverse accumulation when Jacobians
// exist, else the smoothed-ES estimate); smoothed_es carries the
// full-horizon antithetic ES estimate with a large particle count when
// requested (always present when it is the only route).
struct GroundTruth {
  Vector gradient;
  std::string provenance;
  std::optional<Vector> smoothed_es;
};
GroundTruth ground_truth_gradient(const UnrolledSystem& task, const Vector& theta, double sigma,
                                  int n_particles_large = 5000, std::uint64_t seed = 0,
                                  int workers = 1, bool compute_smoothed = false);

// Runs n_trials independent seed streams; each trial accumulates estimates
// over all T/K unrolls with theta frozen (no parameter updates), then reports
// the unbiased sample variance of the accumulated estimate. The standard
// error comes from 20-batch batching of the trials. Measuring with online
// updates (hysteresis) is not a supported protocol; no_param_updates must
// stay true.
VarianceReport empirical_variance(EstimatorKind estimator, const UnrolledSystem& task, int k_steps,
                                  const NoiseSpec& noise, long n_trials,
                                  std::optional<Vector> theta = std::nullopt, int workers = 1,
                                  bool no_param_updates = true);

// Exact total variance tr(Var(ghat)) of the accumulated antithetic PES
// estimate (single pair) for the four controlled gradient-matrix scenarios.
// The iid scenarios use the stationary-magnitude convention and carry a
// leading-order caveat in reports.
double analytic_variance(tasks::Scenario scenario, int param_dim, int n_unrolls,
                         double g_norm_sq);

}  // namespace ucgrad
