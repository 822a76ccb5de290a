#pragma once

#include <vector>

#include "ucgrad/bench/config.hpp"

namespace ucgrad::bench {

struct RunRow {
  long iteration = 0;
  int inner_t = 0;        // inner step index before the unroll
  Vector theta;           // after the update
  double grad_norm = 0.0;
  double meta_loss = 0.0;  // full-unroll evaluation; NaN off the eval cadence
  double wall_s = 0.0;
};

struct RunLog {
  std::vector<RunRow> rows;
  Vector final_theta;
  double best_meta_loss = 0.0;
  double final_meta_loss = 0.0;
};

// Outer optimization loop: inner-problem resets at t >= T, one estimator step
// and one optimizer update per iteration, full-unroll meta-loss evaluation on
// the eval cadence (and at the final iteration).
RunLog run_experiment(const ExperimentConfig& cfg);

// Runs every horizon point of the job and returns one report per point,
// paired with the matching closed-form prediction.
struct VariancePoint {
  int horizon = 0;
  VarianceReport report;
  double analytic = 0.0;
};
std::vector<VariancePoint> run_variance_job(const VarianceJob& job);

}  // namespace ucgrad::bench
