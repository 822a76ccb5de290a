#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ucgrad/outer_opt.hpp"
#include "ucgrad/tasks.hpp"
#include "ucgrad/variance_lab.hpp"

namespace ucgrad::bench {

// section name -> key/value pairs
using IniDoc = std::map<std::string, tasks::KeyValues>;

// Flat `key = value` file with [section] headers; '#' and ';' start comments.
IniDoc parse_ini(std::istream& in);
IniDoc parse_ini_file(const std::string& path);

struct ExperimentConfig {
  std::string task_name;
  tasks::KeyValues task_params;  // passed through to make_task

  EstimatorKind estimator = EstimatorKind::Pes;
  int unroll_length = 1;  // K
  NoiseSpec noise;

  OptimizerConfig outer;

  long iterations = 0;
  long eval_every = 50;
  int workers = 1;
  std::string out_dir;
  std::optional<Vector> theta_override;

  void validate() const;  // field-level ConfigError messages
};

ExperimentConfig experiment_from_ini(const IniDoc& doc);
ExperimentConfig load_experiment_config(const std::string& path);

// Renders every field (defaults materialized) as a parseable ini document;
// reparsing yields an identical config.
std::string render_ini(const ExperimentConfig& cfg);

// Variance-measurement job description ([variance] section).
struct VarianceJob {
  tasks::Scenario scenario = tasks::Scenario::DiagIdentical;
  EstimatorKind estimator = EstimatorKind::Pes;
  int param_dim = 1;
  std::vector<int> horizon_points;  // one empirical run per T
  int unroll_length = 1;
  NoiseSpec noise;
  double g_norm = 1.0;
  long n_trials = 10000;
  int workers = 1;
  std::string out_dir;

  void validate() const;
};

VarianceJob variance_from_ini(const IniDoc& doc);
VarianceJob load_variance_config(const std::string& path);

}  // namespace ucgrad::bench
