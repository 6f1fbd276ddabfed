#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "physio/classifier.hpp"
#include "physio/metrics.hpp"
#include "physio/pipeline.hpp"

namespace physio {

struct ExperimentConfig {
  TrainConfig train;
  std::size_t runs = 5;
  std::size_t pca_components = 100;
  std::size_t jobs = 1;
};

/// Test metrics of one trained run on one user's test split.
struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  Metrics test;
};

enum class MatrixKind { CrossUser, Combined };
std::string_view name(MatrixKind k);

/// cells[tested][trained] holds one record per run. For CrossUser, column j
/// is the model trained on user j alone; for Combined, column j is the model
/// trained on every user except j. Either way the diagonal is the cell of
/// interest (personalized resp. leave-one-out).
struct MatrixReport {
  MatrixKind kind = MatrixKind::CrossUser;
  std::vector<std::string> users;
  std::vector<std::vector<std::vector<RunRecord>>> cells;

  std::size_t size() const { return users.size(); }
  Summary accuracy(std::size_t tested, std::size_t trained) const;
  /// Label of column j: "User 2" or "{1, 3, 4}".
  std::string column_label(std::size_t trained) const;
};

/// Trains each user's personalized model (runs repetitions, PCA fit on that
/// user's training split) and evaluates every run on every user's test split.
/// Throws EmptySplit naming the user when a split is empty.
MatrixReport cross_user_matrix(const std::vector<FeatureSet>& users, const ExperimentConfig& cfg);

/// For each held-out user j, trains on the pooled train/val splits of the
/// others and evaluates on every user's test split.
MatrixReport combined_matrix(const std::vector<FeatureSet>& users, const ExperimentConfig& cfg);

enum MetricId { kAccuracy = 0, kPrecision, kRecall, kF1 };
inline constexpr std::array<std::string_view, 4> kMetricNames = {"accuracy", "precision", "recall", "f1"};
double metric_value(const Metrics& m, MetricId id);

/// Personalized (cross-user diagonal) against combined (leave-one-out
/// diagonal), paired by (user, run).
struct ComparisonReport {
  std::vector<std::string> users;
  std::vector<std::vector<Metrics>> personalized;  ///< [user][run]
  std::vector<std::vector<Metrics>> combined;      ///< [user][run]
  std::array<Summary, 4> personalized_summary;     ///< over all (user, run) values
  std::array<Summary, 4> combined_summary;
  std::array<TTestResult, 4> tests;
};

/// Throws InsufficientPairs when fewer than two pairs exist and DimError
/// when the two reports do not cover the same users and runs.
ComparisonReport compare(const MatrixReport& cross_user, const MatrixReport& combined);

struct EncoderRow {
  std::string name;
  Summary val_accuracy;
  std::vector<RunRecord> runs;  ///< test holds the validation metrics
};

/// The six encoder configurations compared on one user.
std::vector<EncoderSpec> table1_encoders();

/// Builds one feature set per encoder from the same windows and split,
/// trains `cfg.runs` times each and ranks by mean validation accuracy
/// (descending, ties in input order).
std::vector<EncoderRow> encoder_comparison(const MultimodalRecord& rec, const std::vector<EncoderSpec>& encoders,
                                           const FeaturizeOptions& base, const FeatureExtractor& ex,
                                           const ExperimentConfig& cfg);

/// "92.68 ± 3.67%".
std::string format_pct(const Summary& s);
/// "< 0.001" or the value to four decimals.
std::string format_p(double p);

// Report files. Each writer returns the text table it wrote.
std::string write_table1(const std::vector<EncoderRow>& rows, const std::filesystem::path& out_dir);
std::string write_matrix_table(const MatrixReport& report, const std::filesystem::path& out_dir);
std::string write_table4(const ComparisonReport& report, const std::filesystem::path& out_dir);
void write_classwise_recall(const ComparisonReport& report, const std::filesystem::path& out_dir);

/// runs.jsonl lines for each experiment; every line is one run.
std::string runs_jsonl(const MatrixReport& report);
std::string runs_jsonl(const std::vector<EncoderRow>& rows);

/// Everything recoverable from a runs.jsonl file.
struct RunLog {
  std::vector<EncoderRow> encoders;
  std::vector<MatrixReport> matrices;
};

RunLog parse_runs_jsonl(const std::string& text);

/// Regenerates every table the log supports into out_dir and returns the
/// concatenated text tables.
std::string emit_reports(const RunLog& log, const std::filesystem::path& out_dir);

}  // namespace physio
