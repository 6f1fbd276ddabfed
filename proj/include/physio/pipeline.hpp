#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "physio/classifier.hpp"
#include "physio/dataset.hpp"
#include "physio/embedding.hpp"

namespace physio {

/// Concatenated per-window embeddings of one user, in window order.
struct FeatureSet {
  std::string user_id;
  std::string extractor;
  Eigen::MatrixXf x;  ///< windows x (channels * extractor dim)
  std::vector<Awareness> labels;
  std::vector<Split> splits;
  std::vector<std::size_t> window_ids;

  std::size_t size() const { return labels.size(); }
  std::size_t count(Split s) const;
  /// Rows of one split, widened to double.
  LabeledData subset(Split s) const;
};

struct FeaturizeOptions {
  WindowSpec window;
  EncoderSpec encoder;
  std::uint64_t split_seed = 0;
  SplitFractions fractions;
  SplitMode split_mode = SplitMode::PerWindow;
  std::size_t jobs = 1;
};

/// In-memory equivalent of build + split + extract: every window goes
/// through the same 8-bit quantization as a PNG dataset.
FeatureSet featurize(const MultimodalRecord& rec, const FeatureExtractor& ex, const FeaturizeOptions& options);

/// Reads a split dataset from disk and extracts every sample.
FeatureSet featurize(const DatasetManifest& manifest, const FeatureExtractor& ex, std::size_t jobs = 1);

/// "PFEA1" binary: user id, extractor name, n, d, then per row the label,
/// split and window id followed by d little-endian f32 values.
void save_features(const FeatureSet& fs, const std::filesystem::path& file);
FeatureSet load_features(const std::filesystem::path& file);

/// PCA fit on the training rows, applied to every split.
struct ProjectedData {
  PcaModel pca;
  TrainData data;
};

ProjectedData project_for_training(const FeatureSet& fs, std::size_t components);

/// Pools the train and val splits of several users; the test split is left
/// empty. PCA is fit on the pooled training rows.
ProjectedData project_pooled(const std::vector<const FeatureSet*>& users, std::size_t components);

/// One split of `fs` projected through an existing PCA.
LabeledData project_split(const FeatureSet& fs, Split s, const PcaModel& pca);

}  // namespace physio
