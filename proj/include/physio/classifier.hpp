#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "physio/metrics.hpp"
#include "physio/types.hpp"

namespace physio {

inline constexpr std::size_t kHidden1 = 25;
inline constexpr std::size_t kHidden2 = 10;

/// k -> 25 -> 10 -> 4 fully connected network; ReLU hidden layers, softmax
/// output. Gradients and Adam moments reuse this shape.
struct MlpModel {
  Eigen::MatrixXd w1;  ///< 25 x k
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  ///< 10 x 25
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;  ///< 4 x 10
  Eigen::VectorXd b3;

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }

  /// Zero-valued model of the given input width.
  static MlpModel zeros(std::size_t input_dim);
  /// He fan-in normal weights, zero biases.
  static MlpModel he_init(std::size_t input_dim, std::uint64_t seed);

  /// The six parameter tensors in a fixed order (w1, b1, w2, b2, w3, b3).
  std::array<Eigen::Map<Eigen::VectorXd>, 6> tensors();
  std::array<Eigen::Map<const Eigen::VectorXd>, 6> tensors() const;
  double squared_norm() const;
  bool all_finite() const;
};

struct TrainConfig {
  double lr = 0.001;
  double weight_decay = 1e-4;
  std::size_t max_epochs = 25;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Class probabilities for one input. Throws NumericError on non-finite input
/// and DimError on a width mismatch.
Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x);

/// Arg-max class; ties go to the lower-awareness class.
Awareness predict(const MlpModel& m, const Eigen::VectorXd& x);
Awareness argmax_class(const Eigen::VectorXd& probs);

/// -log(max(p[label], 1e-12)).
double cross_entropy(const Eigen::VectorXd& probs, Awareness label);

struct Gradients {
  MlpModel grad;
  double loss = 0.0;  ///< mean batch loss
};

/// Gradients of the mean cross-entropy over a batch (rows of x).
Gradients backward(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const Awareness> labels);

struct AdamState {
  MlpModel m;
  MlpModel v;
  std::size_t step = 0;

  static AdamState for_model(const MlpModel& model);
};

/// One Adam update with bias correction. Weight decay is the coupled L2 form:
/// weight_decay * param is added to the gradient before the moment updates.
void adam_step(MlpModel& params, const MlpModel& grads, AdamState& state, const TrainConfig& cfg);

struct LabeledData {
  Eigen::MatrixXd x;  ///< rows are samples
  std::vector<Awareness> y;

  std::size_t size() const { return y.size(); }
};

struct TrainData {
  LabeledData train;
  LabeledData val;
  LabeledData test;
};

ConfusionMatrix evaluate(const MlpModel& m, const LabeledData& data);
double mean_loss(const MlpModel& m, const LabeledData& data);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> train_loss;  ///< full training-set loss after each epoch
  std::vector<double> val_f1;      ///< macro F1 after each epoch
  std::size_t best_epoch = 0;      ///< 1-based
  MlpModel best;
  Metrics val;   ///< at the best epoch
  Metrics test;  ///< at the best epoch
  ConfusionMatrix test_confusion;
};

/// Mini-batch Adam for up to cfg.max_epochs epochs, keeping the checkpoint
/// with the highest validation macro F1 (earliest epoch on ties). Throws
/// EmptySplit when any split is empty.
RunResult train(const TrainData& data, const TrainConfig& cfg);

using Trainer = std::function<RunResult(const TrainData&, const TrainConfig&)>;

struct RepeatSummary {
  std::vector<RunResult> runs;
  Summary accuracy, precision, recall, f1, val_accuracy;
  std::array<Summary, kNumClasses> class_recall;
  bool single_run = false;
};

/// n_runs trainings with seeds cfg.seed + 0 .. cfg.seed + n_runs - 1.
RepeatSummary repeat_runs(const TrainData& data, const TrainConfig& cfg, std::size_t n_runs,
                          std::size_t jobs = 1, const Trainer& trainer = train);

/// Versioned checkpoint "PMLP1": config, input width and all weights as
/// little-endian f64. Round trip is bit-exact.
void save_checkpoint(const MlpModel& m, const TrainConfig& cfg, const std::filesystem::path& file);
MlpModel load_checkpoint(const std::filesystem::path& file, TrainConfig* cfg = nullptr);

}  // namespace physio
