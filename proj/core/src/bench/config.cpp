#include "ucgrad/bench/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ucgrad::bench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const tasks::KeyValues* section(const IniDoc& doc, const std::string& name) {
  auto it = doc.find(name);
  return it == doc.end() ? nullptr : &it->second;
}

std::string require(const IniDoc& doc, const std::string& sec, const std::string& key) {
  const auto* s = section(doc, sec);
  if (s) {
    auto it = s->find(key);
    if (it != s->end()) return it->second;
  }
  throw ConfigError(sec + "." + key + ": missing required field");
}

std::string get(const IniDoc& doc, const std::string& sec, const std::string& key,
                const std::string& fallback) {
  const auto* s = section(doc, sec);
  if (!s) return fallback;
  auto it = s->find(key);
  return it == s->end() ? fallback : it->second;
}

double to_double(const std::string& field, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& field, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected an integer, got '" + v + "'");
  }
}

double get_double(const IniDoc& doc, const std::string& sec, const std::string& key,
                  double fallback) {
  const std::string v = get(doc, sec, key, "");
  return v.empty() ? fallback : to_double(sec + "." + key, v);
}

long get_long(const IniDoc& doc, const std::string& sec, const std::string& key, long fallback) {
  const std::string v = get(doc, sec, key, "");
  return v.empty() ? fallback : to_long(sec + "." + key, v);
}

}  // namespace

IniDoc parse_ini(std::istream& in) {
  IniDoc doc;
  std::string line, current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      doc[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    doc[current][key] = value;
  }
  return doc;
}

IniDoc parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_ini(in);
}

void ExperimentConfig::validate() const {
  if (task_name.empty()) throw ConfigError("task.name: missing required field");
  if (unroll_length < 1) throw ConfigError("estimator.unroll_length: must be >= 1");
  if (iterations < 0) throw ConfigError("run.iterations: must be >= 0");
  if (eval_every < 1) throw ConfigError("run.eval_every: must be >= 1");
  if (workers < 1) throw ConfigError("run.workers: must be >= 1");
  if (estimator == EstimatorKind::Es || estimator == EstimatorKind::Pes ||
      estimator == EstimatorKind::PesAnalytic) {
    noise.validate();
  }
  // the horizon check needs the constructed task; run_experiment enforces K | T
}

ExperimentConfig experiment_from_ini(const IniDoc& doc) {
  ExperimentConfig cfg;
  cfg.task_name = require(doc, "task", "name");
  if (const auto* s = section(doc, "task")) {
    cfg.task_params = *s;
    cfg.task_params.erase("name");
  }

  cfg.estimator = estimator_from_string(get(doc, "estimator", "kind", "pes"));
  cfg.unroll_length = static_cast<int>(get_long(doc, "estimator", "unroll_length", 1));
  cfg.noise.sigma = get_double(doc, "estimator", "sigma", 0.1);
  cfg.noise.n_particles = static_cast<int>(get_long(doc, "estimator", "n_particles", 2));

  cfg.outer.kind = opt_kind_from_string(get(doc, "outer", "optimizer", "adam"));
  cfg.outer.lr = get_double(doc, "outer", "lr", 1e-2);
  cfg.outer.beta1 = get_double(doc, "outer", "beta1", 0.99);
  cfg.outer.beta2 = get_double(doc, "outer", "beta2", 0.999);
  cfg.outer.eps = get_double(doc, "outer", "eps", 1e-8);
  const std::string clip = get(doc, "outer", "clip", "");
  if (!clip.empty() && clip != "none") {
    const double c = to_double("outer.clip", clip);
    if (c <= 0.0) throw ConfigError("outer.clip: must be > 0 (or 'none')");
    cfg.outer.clip = c;
  }

  cfg.iterations = get_long(doc, "run", "iterations", 0);
  cfg.eval_every = get_long(doc, "run", "eval_every", 50);
  cfg.workers = static_cast<int>(get_long(doc, "run", "workers", 1));
  cfg.noise.base_seed = static_cast<std::uint64_t>(get_long(doc, "run", "base_seed", 0));
  cfg.out_dir = get(doc, "run", "out_dir", "");
  const std::string theta = get(doc, "run", "theta", "");
  if (!theta.empty()) {
    std::vector<double> vals;
    std::stringstream ss(theta);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(to_double("run.theta", trim(tok)));
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    cfg.theta_override = std::move(v);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_ini(parse_ini_file(path));
}

std::string render_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[task]\n";
  out << "name = " << cfg.task_name << "\n";
  for (const auto& [k, v] : cfg.task_params) out << k << " = " << v << "\n";
  out << "\n[estimator]\n";
  out << "kind = " << to_string(cfg.estimator) << "\n";
  out << "unroll_length = " << cfg.unroll_length << "\n";
  out << "n_particles = " << cfg.noise.n_particles << "\n";
  out << "sigma = " << fmt17(cfg.noise.sigma) << "\n";
  out << "\n[outer]\n";
  out << "optimizer = " << to_string(cfg.outer.kind) << "\n";
  out << "lr = " << fmt17(cfg.outer.lr) << "\n";
  out << "beta1 = " << fmt17(cfg.outer.beta1) << "\n";
  out << "beta2 = " << fmt17(cfg.outer.beta2) << "\n";
  out << "eps = " << fmt17(cfg.outer.eps) << "\n";
  out << "clip = " << (cfg.outer.clip ? fmt17(*cfg.outer.clip) : std::string("none")) << "\n";
  out << "\n[run]\n";
  out << "iterations = " << cfg.iterations << "\n";
  out << "eval_every = " << cfg.eval_every << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "base_seed = " << cfg.noise.base_seed << "\n";
  if (!cfg.out_dir.empty()) out << "out_dir = " << cfg.out_dir << "\n";
  if (cfg.theta_override) {
    out << "theta = ";
    for (Eigen::Index i = 0; i < cfg.theta_override->size(); ++i) {
      if (i) out << ",";
      out << fmt17((*cfg.theta_override)[i]);
    }
    out << "\n";
  }
  return out.str();
}

void VarianceJob::validate() const {
  if (param_dim < 1) throw ConfigError("variance.P: must be >= 1");
  if (horizon_points.empty()) throw ConfigError("variance.T: need at least one horizon");
  for (int t : horizon_points)
    if (t < 1) throw ConfigError("variance.T: horizons must be >= 1");
  if (unroll_length < 1) throw ConfigError("variance.K: must be >= 1");
  if (n_trials < 2) throw ConfigError("variance.n_trials: must be >= 2");
  if (g_norm <= 0.0) throw ConfigError("variance.g_norm: must be > 0");
  if (workers < 1) throw ConfigError("variance.workers: must be >= 1");
  noise.validate();
}

VarianceJob variance_from_ini(const IniDoc& doc) {
  VarianceJob job;
  job.scenario = tasks::scenario_from_string(get(doc, "variance", "scenario", "diag_identical"));
  job.estimator = estimator_from_string(get(doc, "variance", "estimator", "pes"));
  job.param_dim = static_cast<int>(get_long(doc, "variance", "P", 1));
  {
    std::stringstream ss(get(doc, "variance", "T", "1"));
    std::string tok;
    while (std::getline(ss, tok, ','))
      job.horizon_points.push_back(static_cast<int>(to_long("variance.T", trim(tok))));
  }
  job.unroll_length = static_cast<int>(get_long(doc, "variance", "K", 1));
  job.noise.sigma = get_double(doc, "variance", "sigma", 0.3);
  job.noise.n_particles = static_cast<int>(get_long(doc, "variance", "n_particles", 2));
  job.noise.base_seed = static_cast<std::uint64_t>(get_long(doc, "variance", "base_seed", 0));
  job.g_norm = get_double(doc, "variance", "g_norm", 1.0);
  job.n_trials = get_long(doc, "variance", "n_trials", 10000);
  job.workers = static_cast<int>(get_long(doc, "variance", "workers", 1));
  job.out_dir = get(doc, "variance", "out_dir", "");
  job.validate();
  return job;
}

VarianceJob load_variance_config(const std::string& path) {
  return variance_from_ini(parse_ini_file(path));
}

}  // namespace ucgrad::bench
