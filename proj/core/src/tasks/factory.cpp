#include <charconv>
#include <cstdlib>
#include <sstream>

#include "ucgrad/idx.hpp"
#include "ucgrad/tasks.hpp"

namespace ucgrad::tasks {

namespace {

std::string get(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("task." + key + ": expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("task." + key + ": expected an integer, got '" + value + "'");
  }
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_double(key, it->second);
}

int get_int(const KeyValues& kv, const std::string& key, int fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_int(key, it->second);
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("task." + key + ": expected true|false, got '" + it->second + "'");
}

Vector parse_vector(const std::string& key, const std::string& value) {
  Vector out;
  std::vector<double> vals;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(parse_double(key, tok));
  out.resize(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> vals;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(parse_int(key, tok));
  return vals;
}

}  // namespace

std::unique_ptr<UnrolledSystem> make_task(const std::string& name, const KeyValues& config) {
  if (name == "influence_balancing") {
    return std::make_unique<InfluenceBalancingTask>(get_int(config, "horizon", 100),
                                                    get_int(config, "n", 23),
                                                    get_int(config, "n_positive", 10));
  }
  if (name == "toy2d") {
    Vector theta0;
    if (auto it = config.find("theta0"); it != config.end())
      theta0 = parse_vector("theta0", it->second);
    return std::make_unique<Toy2dRegressionTask>(get_int(config, "horizon", 100),
                                                 std::move(theta0));
  }
  if (name == "quadratic") {
    return std::make_unique<QuadraticScenarioTask>(
        scenario_from_string(get(config, "scenario", "diag_identical")),
        get_int(config, "P", 1), get_int(config, "horizon", 1),
        get_double(config, "g_norm", 1.0));
  }
  if (name == "cumquad") {
    return std::make_unique<CoupledQuadraticTask>(get_int(config, "P", 3),
                                                  get_int(config, "horizon", 4));
  }
  if (name == "mlp_lr_decay") {
    MlpTaskConfig cfg;
    cfg.horizon = get_int(config, "horizon", 1000);
    cfg.batch_size = get_int(config, "batch_size", 100);
    cfg.momentum = get_double(config, "momentum", 0.9);
    cfg.q_constant = get_double(config, "q", 5000.0);
    cfg.log_space = get_bool(config, "log_space", true);
    cfg.init_seed = static_cast<std::uint64_t>(get_int(config, "init_seed", 0));
    if (auto it = config.find("hidden"); it != config.end())
      cfg.hidden = parse_int_list("hidden", it->second);
    const std::string obj = get(config, "objective", "train_loss");
    if (obj == "train_loss") {
      cfg.objective = MetaObjective::TrainLoss;
    } else if (obj == "val_accuracy") {
      cfg.objective = MetaObjective::ValAccuracy;
    } else if (obj == "fixed_batch_loss") {
      cfg.objective = MetaObjective::FixedBatchLoss;
    } else {
      throw ConfigError("task.objective: expected train_loss|val_accuracy|fixed_batch_loss, got '" +
                        obj + "'");
    }

    Dataset data;
    const std::string images = get(config, "idx_images", "");
    const std::string labels = get(config, "idx_labels", "");
    if (!images.empty() || !labels.empty()) {
      if (images.empty() || labels.empty())
        throw ConfigError("task.idx_images/idx_labels: both paths are required for IDX data");
      idx::Images imgs = idx::load_images(images);
      data.inputs = std::move(imgs.data);
      data.labels = idx::load_labels(labels);
      if (static_cast<int>(data.labels.size()) != imgs.count)
        throw ConfigError("task.idx_labels: label count does not match image count");
      data.n_classes = 1 + *std::max_element(data.labels.begin(), data.labels.end());
    } else {
      data = make_two_gaussians(get_int(config, "n_points", 2000),
                                static_cast<std::uint64_t>(get_int(config, "data_seed", 0)));
    }
    return std::make_unique<LrDecayMlpTask>(std::move(data), std::move(cfg));
  }
  throw ConfigError("task.name: unknown task '" + name +
                    "' (expected influence_balancing|toy2d|quadratic|cumquad|mlp_lr_decay)");
}

}  // namespace ucgrad::tasks
