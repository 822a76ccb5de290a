#include <cmath>

#include "ucgrad/rng.hpp"
#include "ucgrad/tasks.hpp"

namespace ucgrad::tasks {

Dataset make_two_gaussians(int n_points, std::uint64_t seed) {
  if (n_points < 4) throw ConfigError("mlp.dataset: need at least 4 points");
  rng::CounterStream stream(rng::mix_stream(seed, 0x5eed, 0xda7a));
  Dataset d;
  d.inputs.resize(n_points, 2);
  d.labels.resize(static_cast<size_t>(n_points));
  d.n_classes = 2;
  for (int i = 0; i < n_points; ++i) {
    const int label = i % 2;
    const double cx = label == 0 ? -1.2 : 1.2;
    const double cy = label == 0 ? -0.6 : 0.6;
    d.inputs(i, 0) = cx + stream.next_gaussian();
    d.inputs(i, 1) = cy + stream.next_gaussian();
    d.labels[static_cast<size_t>(i)] = label;
  }
  return d;
}

LrDecayMlpTask::LrDecayMlpTask(Dataset dataset, MlpTaskConfig config)
    : data_(std::move(dataset)), cfg_(std::move(config)) {
  if (cfg_.horizon < 1) throw ConfigError("mlp.horizon: must be >= 1");
  if (data_.n_classes < 2) throw ConfigError("mlp.dataset: need at least 2 classes");
  if (cfg_.batch_size < 1) throw ConfigError("mlp.batch_size: must be >= 1");
  layer_sizes_.push_back(static_cast<int>(data_.inputs.cols()));
  for (int h : cfg_.hidden) {
    if (h < 1) throw ConfigError("mlp.hidden: widths must be >= 1");
    layer_sizes_.push_back(h);
  }
  layer_sizes_.push_back(data_.n_classes);

  n_weights_ = 0;
  for (size_t l = 0; l + 1 < layer_sizes_.size(); ++l)
    n_weights_ += layer_sizes_[l] * layer_sizes_[l + 1] + layer_sizes_[l + 1];

  n_train_ = static_cast<int>(cfg_.train_fraction * static_cast<double>(data_.inputs.rows()));
  n_train_ = std::max(1, std::min<int>(n_train_, static_cast<int>(data_.inputs.rows()) - 1));
  if (cfg_.batch_size > n_train_) throw ConfigError("mlp.batch_size: exceeds training set size");
  n_batches_ = n_train_ / cfg_.batch_size;

  // seed-fixed He-style init
  rng::CounterStream stream(rng::mix_stream(cfg_.init_seed, 0x31ee7, 0x1417));
  w_init_.resize(n_weights_);
  int off = 0;
  for (size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    const double scale = std::sqrt(2.0 / fan_in);
    for (int k = 0; k < fan_in * fan_out; ++k) w_init_[off + k] = scale * stream.next_gaussian();
    off += fan_in * fan_out;
    for (int k = 0; k < fan_out; ++k) w_init_[off + k] = 0.0;
    off += fan_out;
  }
}

SystemState LrDecayMlpTask::init_state() const {
  SystemState s;
  s.values.resize(2 * n_weights_);
  s.values.head(n_weights_) = w_init_;
  s.values.tail(n_weights_).setZero();  // momentum buffers
  s.step_index = 0;
  return s;
}

Vector LrDecayMlpTask::init_params() const {
  Vector t(2);
  if (cfg_.log_space) {
    t[0] = std::log(0.1);  // log initial lr
    t[1] = std::log(1.0);  // log decay factor
  } else {
    t[0] = 0.1;
    t[1] = 1.0;
  }
  return t;
}

double LrDecayMlpTask::learning_rate(int t, const Vector& theta) const {
  const double th0 = cfg_.log_space ? std::exp(theta[0]) : theta[0];
  const double th1 = cfg_.log_space ? std::exp(theta[1]) : theta[1];
  return th0 / std::pow(1.0 + static_cast<double>(t) / cfg_.q_constant, th1);
}

// forward pass returning mean softmax cross-entropy over rows [lo, hi) of the
// dataset; fills grad (w.r.t. weights) when requested
double LrDecayMlpTask::batch_loss_and_grad(const Vector& w, int batch_index, Vector* grad) const {
  const int lo = (batch_index % n_batches_) * cfg_.batch_size;
  const int m = cfg_.batch_size;
  const size_t n_layers = layer_sizes_.size() - 1;

  std::vector<Matrix> acts;  // post-activation, acts[0] = batch inputs
  acts.reserve(n_layers + 1);
  acts.push_back(data_.inputs.middleRows(lo, m));

  std::vector<const double*> W(n_layers), b(n_layers);
  {
    int off = 0;
    for (size_t l = 0; l < n_layers; ++l) {
      W[l] = w.data() + off;
      off += layer_sizes_[l] * layer_sizes_[l + 1];
      b[l] = w.data() + off;
      off += layer_sizes_[l + 1];
    }
  }

  for (size_t l = 0; l < n_layers; ++l) {
    const Eigen::Map<const Matrix> Wl(W[l], layer_sizes_[l], layer_sizes_[l + 1]);
    const Eigen::Map<const Vector> bl(b[l], layer_sizes_[l + 1]);
    Matrix z = acts[l] * Wl;
    z.rowwise() += bl.transpose();
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);  // ReLU
    acts.push_back(std::move(z));
  }

  // softmax cross-entropy
  Matrix probs = acts.back();
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double mx = probs.row(i).maxCoeff();
    probs.row(i) = (probs.row(i).array() - mx).exp();
    probs.row(i) /= probs.row(i).sum();
    loss -= std::log(std::max(probs(i, data_.labels[static_cast<size_t>(lo + i)]), 1e-300));
  }
  loss /= m;
  if (!grad) return loss;

  grad->setZero();
  Matrix delta = probs;
  for (int i = 0; i < m; ++i) delta(i, data_.labels[static_cast<size_t>(lo + i)]) -= 1.0;
  delta /= static_cast<double>(m);

  int off_end = n_weights_;
  for (size_t l = n_layers; l-- > 0;) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    off_end -= fan_out;
    Eigen::Map<Vector>(grad->data() + off_end, fan_out) = delta.colwise().sum();
    off_end -= fan_in * fan_out;
    Eigen::Map<Matrix>(grad->data() + off_end, fan_in, fan_out) = acts[l].transpose() * delta;
    if (l > 0) {
      const Eigen::Map<const Matrix> Wl(W[l], fan_in, fan_out);
      delta = (delta * Wl.transpose()).cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

double LrDecayMlpTask::validation_error(const Vector& w) const {
  const int lo = n_train_;
  const int m = static_cast<int>(data_.inputs.rows()) - n_train_;
  const size_t n_layers = layer_sizes_.size() - 1;
  Matrix act = data_.inputs.middleRows(lo, m);
  int off = 0;
  for (size_t l = 0; l < n_layers; ++l) {
    const Eigen::Map<const Matrix> Wl(w.data() + off, layer_sizes_[l], layer_sizes_[l + 1]);
    off += layer_sizes_[l] * layer_sizes_[l + 1];
    const Eigen::Map<const Vector> bl(w.data() + off, layer_sizes_[l + 1]);
    off += layer_sizes_[l + 1];
    Matrix z = act * Wl;
    z.rowwise() += bl.transpose();
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    act = std::move(z);
  }
  int correct = 0;
  for (int i = 0; i < m; ++i) {
    Eigen::Index arg;
    act.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == data_.labels[static_cast<size_t>(lo + i)]) ++correct;
  }
  return 1.0 - static_cast<double>(correct) / m;
}

StepResult LrDecayMlpTask::step(const SystemState& state, const Vector& theta) const {
  const int t = state.step_index;
  const double lr = learning_rate(t, theta);
  Vector w = state.values.head(n_weights_);
  Vector mom = state.values.tail(n_weights_);
  Vector grad(n_weights_);
  const double train_loss = batch_loss_and_grad(w, t, &grad);
  mom = cfg_.momentum * mom + grad;
  w -= lr * mom;

  StepResult r;
  r.state.values.resize(2 * n_weights_);
  r.state.values.head(n_weights_) = w;
  r.state.values.tail(n_weights_) = mom;
  r.state.step_index = t + 1;
  switch (cfg_.objective) {
    case MetaObjective::TrainLoss: r.loss = train_loss; break;
    case MetaObjective::ValAccuracy: r.loss = validation_error(w); break;
    case MetaObjective::FixedBatchLoss: r.loss = batch_loss_and_grad(w, 0, nullptr); break;
  }
  return r;
}

}  // namespace ucgrad::tasks
