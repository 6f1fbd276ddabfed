#include "physio/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "physio/binio.hpp"
#include "physio/errors.hpp"
#include "physio/parallel.hpp"
#include "physio/rng.hpp"

namespace physio {

namespace {

constexpr std::string_view kCheckpointMagic = "PMLP1";
constexpr double kProbFloor = 1e-12;

template <class Self, class MapT>
std::array<MapT, 6> tensor_maps(Self& m) {
  auto map = [](auto& t) { return MapT(t.data(), t.size()); };
  return {map(m.w1), map(m.b1), map(m.w2), map(m.b2), map(m.w3), map(m.b3)};
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p = z;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const double mx = p.col(c).maxCoeff();
    p.col(c) = (p.col(c).array() - mx).exp();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

void check_input_width(const MlpModel& m, Eigen::Index width) {
  if (width != m.w1.cols()) {
    throw DimError("model expects " + std::to_string(m.w1.cols()) + " inputs, got " + std::to_string(width));
  }
}

}  // namespace

MlpModel MlpModel::zeros(std::size_t input_dim) {
  const auto k = static_cast<Eigen::Index>(input_dim);
  constexpr auto h1 = static_cast<Eigen::Index>(kHidden1);
  constexpr auto h2 = static_cast<Eigen::Index>(kHidden2);
  constexpr auto c = static_cast<Eigen::Index>(kNumClasses);
  return {Eigen::MatrixXd::Zero(h1, k), Eigen::VectorXd::Zero(h1), Eigen::MatrixXd::Zero(h2, h1),
          Eigen::VectorXd::Zero(h2),    Eigen::MatrixXd::Zero(c, h2), Eigen::VectorXd::Zero(c)};
}

MlpModel MlpModel::he_init(std::size_t input_dim, std::uint64_t seed) {
  MlpModel m = zeros(input_dim);
  Rng rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& w) {
    const double sd = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = sd * rng.normal();
    }
  };
  fill(m.w1);
  fill(m.w2);
  fill(m.w3);
  return m;
}

std::array<Eigen::Map<Eigen::VectorXd>, 6> MlpModel::tensors() {
  return tensor_maps<MlpModel, Eigen::Map<Eigen::VectorXd>>(*this);
}

std::array<Eigen::Map<const Eigen::VectorXd>, 6> MlpModel::tensors() const {
  return tensor_maps<const MlpModel, Eigen::Map<const Eigen::VectorXd>>(*this);
}

double MlpModel::squared_norm() const {
  double s = 0.0;
  for (const auto& t : tensors()) s += t.squaredNorm();
  return s;
}

bool MlpModel::all_finite() const {
  for (const auto& t : tensors()) {
    if (!t.allFinite()) return false;
  }
  return true;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
}

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
  check_input_width(m, x.size());
  if (!x.allFinite()) throw NumericError("non-finite classifier input");
  const Eigen::VectorXd a1 = (m.w1 * x + m.b1).cwiseMax(0.0);
  const Eigen::VectorXd a2 = (m.w2 * a1 + m.b2).cwiseMax(0.0);
  return softmax_columns(m.w3 * a2 + m.b3);
}

Awareness argmax_class(const Eigen::VectorXd& probs) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs.size(); ++i) {
    if (probs(i) > probs(best)) best = i;
  }
  return kAllClasses[static_cast<std::size_t>(best)];
}

Awareness predict(const MlpModel& m, const Eigen::VectorXd& x) { return argmax_class(forward(m, x)); }

double cross_entropy(const Eigen::VectorXd& probs, Awareness label) {
  return -std::log(std::max(probs(static_cast<Eigen::Index>(index(label))), kProbFloor));
}

Gradients backward(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const Awareness> labels) {
  if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw DimError("backward needs a non-empty batch with one label per row");
  }
  check_input_width(m, x.cols());
  const double inv_b = 1.0 / static_cast<double>(x.rows());

  // Columns are samples.
  const Eigen::MatrixXd a0 = x.transpose();
  const Eigen::MatrixXd z1 = (m.w1 * a0).colwise() + m.b1;
  const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
  const Eigen::MatrixXd z2 = (m.w2 * a1).colwise() + m.b2;
  const Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
  const Eigen::MatrixXd p = softmax_columns((m.w3 * a2).colwise() + m.b3);

  Gradients g{MlpModel::zeros(m.input_dim()), 0.0};
  Eigen::MatrixXd d3 = p;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(index(labels[i]));
    const auto col = static_cast<Eigen::Index>(i);
    g.loss -= std::log(std::max(p(c, col), kProbFloor));
    d3(c, col) -= 1.0;
  }
  g.loss *= inv_b;
  d3 *= inv_b;

  g.grad.w3 = d3 * a2.transpose();
  g.grad.b3 = d3.rowwise().sum();
  const Eigen::MatrixXd d2 = (m.w3.transpose() * d3).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
  g.grad.w2 = d2 * a1.transpose();
  g.grad.b2 = d2.rowwise().sum();
  const Eigen::MatrixXd d1 = (m.w2.transpose() * d2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
  g.grad.w1 = d1 * a0.transpose();
  g.grad.b1 = d1.rowwise().sum();
  return g;
}

AdamState AdamState::for_model(const MlpModel& model) {
  return {MlpModel::zeros(model.input_dim()), MlpModel::zeros(model.input_dim()), 0};
}

void adam_step(MlpModel& params, const MlpModel& grads, AdamState& state, const TrainConfig& cfg) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i].size() != p[i].size()) throw DimError("gradient shape does not match parameters");
    for (Eigen::Index j = 0; j < p[i].size(); ++j) {
      const double gj = g[i](j) + cfg.weight_decay * p[i](j);
      m[i](j) = cfg.beta1 * m[i](j) + (1.0 - cfg.beta1) * gj;
      v[i](j) = cfg.beta2 * v[i](j) + (1.0 - cfg.beta2) * gj * gj;
      p[i](j) -= cfg.lr * (m[i](j) / c1) / (std::sqrt(v[i](j) / c2) + cfg.eps);
    }
  }
}

ConfusionMatrix evaluate(const MlpModel& m, const LabeledData& data) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < data.size(); ++i) {
    cm.add(data.y[i], predict(m, data.x.row(static_cast<Eigen::Index>(i)).transpose()));
  }
  return cm;
}

double mean_loss(const MlpModel& m, const LabeledData& data) {
  if (data.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    s += cross_entropy(forward(m, data.x.row(static_cast<Eigen::Index>(i)).transpose()), data.y[i]);
  }
  return s / static_cast<double>(data.size());
}

RunResult train(const TrainData& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.size() == 0) throw EmptySplit("train");
  if (data.val.size() == 0) throw EmptySplit("val");
  if (data.test.size() == 0) throw EmptySplit("test");
  const auto k = static_cast<std::size_t>(data.train.x.cols());
  if (data.val.x.cols() != data.train.x.cols() || data.test.x.cols() != data.train.x.cols()) {
    throw DimError("train/val/test feature widths differ");
  }

  RunResult r;
  r.seed = cfg.seed;
  MlpModel model = MlpModel::he_init(k, derive_seed(cfg.seed, 0));
  AdamState state = AdamState::for_model(model);
  Rng shuffler(derive_seed(cfg.seed, 1));

  const std::size_t n = data.train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best_f1 = -1.0;
  Eigen::MatrixXd batch;
  std::vector<Awareness> batch_y;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffler.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      batch.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(k));
      batch_y.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        batch.row(static_cast<Eigen::Index>(i)) = data.train.x.row(static_cast<Eigen::Index>(order[start + i]));
        batch_y[i] = data.train.y[order[start + i]];
      }
      const Gradients g = backward(model, batch, batch_y);
      adam_step(model, g.grad, state, cfg);
    }
    if (!model.all_finite()) throw NumericError("training diverged at epoch " + std::to_string(epoch));

    r.train_loss.push_back(mean_loss(model, data.train));
    const Metrics val = metrics(evaluate(model, data.val));
    r.val_f1.push_back(val.f1);
    if (val.f1 > best_f1) {
      best_f1 = val.f1;
      r.best_epoch = epoch;
      r.best = model;
      r.val = val;
    }
  }
  r.test_confusion = evaluate(r.best, data.test);
  r.test = metrics(r.test_confusion);
  return r;
}

RepeatSummary repeat_runs(const TrainData& data, const TrainConfig& cfg, std::size_t n_runs, std::size_t jobs,
                          const Trainer& trainer) {
  if (n_runs < 1) throw ConfigError("runs must be at least 1");
  RepeatSummary s;
  s.runs.resize(n_runs);
  parallel_for(n_runs, jobs, [&](std::size_t i) {
    TrainConfig c = cfg;
    c.seed = cfg.seed + i;
    s.runs[i] = trainer(data, c);
  });
  auto collect = [&](auto get) {
    std::vector<double> v;
    v.reserve(n_runs);
    for (const RunResult& r : s.runs) v.push_back(get(r));
    return summarize(v);
  };
  s.accuracy = collect([](const RunResult& r) { return r.test.accuracy; });
  s.precision = collect([](const RunResult& r) { return r.test.precision; });
  s.recall = collect([](const RunResult& r) { return r.test.recall; });
  s.f1 = collect([](const RunResult& r) { return r.test.f1; });
  s.val_accuracy = collect([](const RunResult& r) { return r.val.accuracy; });
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    s.class_recall[c] = collect([c](const RunResult& r) { return r.test.class_recall[c]; });
  }
  s.single_run = n_runs == 1;
  return s;
}

void save_checkpoint(const MlpModel& m, const TrainConfig& cfg, const std::filesystem::path& file) {
  ByteWriter out(kCheckpointMagic);
  out.f64(cfg.lr);
  out.f64(cfg.weight_decay);
  out.u64(cfg.max_epochs);
  out.u64(cfg.batch_size);
  out.u64(cfg.seed);
  out.f64(cfg.beta1);
  out.f64(cfg.beta2);
  out.f64(cfg.eps);
  out.u64(m.input_dim());
  for (const auto& t : m.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) out.f64(t(i));
  }
  out.save(file);
}

MlpModel load_checkpoint(const std::filesystem::path& file, TrainConfig* cfg) {
  ByteReader in = ByteReader::open(file, kCheckpointMagic);
  TrainConfig c;
  c.lr = in.f64();
  c.weight_decay = in.f64();
  c.max_epochs = in.u64();
  c.batch_size = in.u64();
  c.seed = in.u64();
  c.beta1 = in.f64();
  c.beta2 = in.f64();
  c.eps = in.f64();
  const std::uint64_t k = in.u64();
  if (k == 0 || k > (1u << 24)) throw FormatError(file.string() + ": implausible input width");
  MlpModel m = MlpModel::zeros(k);
  for (auto& t : m.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = in.f64();
  }
  if (!in.done()) throw FormatError(file.string() + ": trailing bytes");
  if (cfg) *cfg = c;
  return m;
}

}  // namespace physio
