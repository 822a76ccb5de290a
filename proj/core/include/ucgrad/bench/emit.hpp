#pragma once

#include <string>

#include "ucgrad/bench/experiment.hpp"

namespace ucgrad::bench {

// Writes run.csv, summary.json and config.resolved into dir (created if
// missing). Writes are atomic: a temp file is renamed into place. The CSV is
// UTF-8, LF line endings, '.' decimal separator, 17-significant-digit floats,
// header iteration,inner_t,theta_0..theta_{P-1},grad_norm,meta_loss,wall_s.
void emit_results(const RunLog& log, const ExperimentConfig& cfg, const std::string& dir);

// variance.csv: one row per horizon point.
void emit_variance(const std::vector<VariancePoint>& points, const VarianceJob& job,
                   const std::string& dir);

// run.csv with the wall_s column removed; used for determinism comparisons.
std::string csv_without_wall_clock(const std::string& csv_text);

}  // namespace ucgrad::bench
