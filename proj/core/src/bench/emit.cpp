#include "ucgrad/bench/emit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace ucgrad::bench {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("emit: cannot write '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, target);
}

}  // namespace

void emit_results(const RunLog& log, const ExperimentConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  const int P = log.final_theta.size() > 0
                    ? static_cast<int>(log.final_theta.size())
                    : (log.rows.empty() ? 0 : static_cast<int>(log.rows.front().theta.size()));

  std::ostringstream csv;
  csv << "iteration,inner_t";
  for (int j = 0; j < P; ++j) csv << ",theta_" << j;
  csv << ",grad_norm,meta_loss,wall_s\n";
  for (const RunRow& r : log.rows) {
    csv << r.iteration << "," << r.inner_t;
    for (int j = 0; j < P; ++j) csv << "," << fmt17(r.theta[j]);
    csv << "," << fmt17(r.grad_norm) << "," << fmt17(r.meta_loss) << "," << fmt17(r.wall_s)
        << "\n";
  }
  write_atomic(fs::path(dir) / "run.csv", csv.str());

  nlohmann::json j;
  {
    std::istringstream resolved(render_ini(cfg));
    const IniDoc doc = parse_ini(resolved);
    nlohmann::json jc;
    for (const auto& [sec, kv] : doc) {
      for (const auto& [k, v] : kv) jc[sec][k] = v;
    }
    j["config"] = jc;
  }
  j["task"] = cfg.task_name;
  j["base_seed"] = cfg.noise.base_seed;
  j["iterations"] = cfg.iterations;
  j["final_theta"] = std::vector<double>(log.final_theta.data(),
                                         log.final_theta.data() + log.final_theta.size());
  j["best_meta_loss"] = log.best_meta_loss;
  j["final_meta_loss"] = log.final_meta_loss;
  write_atomic(fs::path(dir) / "summary.json", j.dump(2) + "\n");

  write_atomic(fs::path(dir) / "config.resolved", render_ini(cfg));
}

void emit_variance(const std::vector<VariancePoint>& points, const VarianceJob& job,
                   const std::string& dir) {
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "scenario,estimator,P,T,K,n_trials,total_variance,standard_error,normalized,"
         "analytic,ground_truth,leading_order_flag\n";
  for (const auto& pt : points) {
    csv << tasks::to_string(job.scenario) << "," << to_string(job.estimator) << ","
        << job.param_dim << "," << pt.horizon << "," << job.unroll_length << ","
        << pt.report.n_trials << "," << fmt17(pt.report.total_variance) << ","
        << fmt17(pt.report.standard_error) << "," << fmt17(pt.report.normalized) << ","
        << fmt17(pt.analytic) << "," << pt.report.ground_truth_provenance << ","
        << (pt.report.leading_order_flag ? 1 : 0) << "\n";
  }
  write_atomic(fs::path(dir) / "variance.csv", csv.str());
}

std::string csv_without_wall_clock(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << "\n";
  }
  return out.str();
}

}  // namespace ucgrad::bench
