#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "physio/encoders.hpp"
#include "physio/types.hpp"

namespace physio {

inline constexpr std::size_t kFeatureDim = 2048;
inline constexpr std::size_t kConcatDim = kFeatureDim * kNumChannels;  // 14,336

/// Identifies one image of a multimodal window for extractors that look
/// features up instead of computing them.
struct ImageKey {
  std::string stem;
  Channel channel = Channel::AccX;
};

/// Frozen image -> vector map. Implementations hold no trainable state and
/// are safe to call concurrently.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::size_t output_dim() const = 0;

  /// Validates the image (square, entries in [0, 1]) and extracts. Throws
  /// InvalidImage otherwise.
  Eigen::VectorXd extract(const Matrix& image, const ImageKey& key) const;

 protected:
  virtual Eigen::VectorXd do_extract(const Matrix& image, const ImageKey& key) const = 0;
};

/// Seeded random-projection pyramid: the image is average-pooled on 2x2,
/// 4x4, 8x8 and 16x16 grids (340 cell means), mapped through a fixed
/// Gaussian matrix plus bias, then tanh. An all-zero image therefore yields
/// tanh(bias).
class BuiltinExtractor final : public FeatureExtractor {
 public:
  static constexpr std::uint64_t kDefaultSeed = 2048;
  static constexpr std::array<std::size_t, 4> kGrids = {2, 4, 8, 16};
  static constexpr std::size_t kPooledDim = 2 * 2 + 4 * 4 + 8 * 8 + 16 * 16;

  explicit BuiltinExtractor(std::uint64_t seed = kDefaultSeed, std::size_t output_dim = kFeatureDim);

  std::string name() const override { return "builtin-rpp"; }
  std::size_t output_dim() const override { return static_cast<std::size_t>(bias_.size()); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  /// Cell means of the pyramid, coarsest grid first, row-major within a grid.
  static Eigen::VectorXd pool(const Matrix& image);

 protected:
  Eigen::VectorXd do_extract(const Matrix& image, const ImageKey& key) const override;

 private:
  std::uint64_t seed_;
  Eigen::MatrixXd projection_;  // output_dim x kPooledDim
  Eigen::VectorXd bias_;
};

/// Precomputed embeddings keyed by (stem, channel), read from a sidecar.
///
/// Sidecar layout (little-endian): the 5 bytes "PEMB1", then records until
/// end of file, each `u32 stem_length, stem bytes, u8 channel tag (0..6 in
/// acc_x..temp order), 2048 x f32`.
class ExternalExtractor final : public FeatureExtractor {
 public:
  explicit ExternalExtractor(const std::filesystem::path& sidecar);

  std::string name() const override { return "external"; }
  std::size_t output_dim() const override { return kFeatureDim; }
  std::size_t size() const { return table_.size(); }

 protected:
  Eigen::VectorXd do_extract(const Matrix& image, const ImageKey& key) const override;

 private:
  std::map<std::pair<std::string, Channel>, std::vector<float>> table_;
};

struct EmbeddingRecord {
  std::string stem;
  Channel channel = Channel::AccX;
  std::vector<float> values;  // kFeatureDim entries
};

void write_embedding_sidecar(const std::filesystem::path& file, std::span<const EmbeddingRecord> records);

/// Extracts each channel image and concatenates in acc_x..temp order.
/// Throws ChannelCountError unless exactly seven images are given.
Eigen::VectorXd extract_multimodal(std::span<const Matrix> images, const FeatureExtractor& ex,
                                   const std::string& stem = {});

/// Linear PCA basis fit on training rows.
struct PcaModel {
  Eigen::VectorXd mean;           ///< d
  Eigen::MatrixXd components;     ///< k x d, orthonormal rows
  Eigen::VectorXd explained_variance;  ///< k, non-increasing
  double total_variance = 0.0;    ///< sum of all sample variances

  std::size_t k() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  Eigen::VectorXd explained_variance_ratio() const;
};

/// Fits by thin SVD of the centered data (rows are samples). Each
/// component's largest-magnitude coordinate is made positive. Throws
/// RankError when k is 0 or exceeds min(rows, cols).
PcaModel pca_fit(const Eigen::MatrixXd& rows, std::size_t k);

/// (x - mean) projected onto the components. Throws DimError on size mismatch.
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x);
/// Row-wise transform.
Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& rows);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& z);

/// Binary model file: "PPCA1", u64 k, u64 d, f64 total_variance, then mean,
/// explained variance and components (row-major) as little-endian f64.
void save_pca(const PcaModel& model, const std::filesystem::path& file);
PcaModel load_pca(const std::filesystem::path& file);

}  // namespace physio
