#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "physio/encoders.hpp"
#include "physio/image_io.hpp"
#include "physio/signals.hpp"

namespace physio {

inline constexpr std::string_view kToolVersion = "physio 1.0.0";

enum class SplitMode {
  PerWindow,        ///< uniform random over windows (overlapping windows may straddle splits)
  BlockContiguous,  ///< runs of consecutive windows stay together
};

std::string_view name(SplitMode m);
SplitMode parse_split_mode(std::string_view s);

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// train = floor(n * f_train), val = floor(n * f_val), test gets the rest.
SplitCounts split_counts(std::size_t n, const SplitFractions& f);

/// Seeded assignment for n time-ordered windows. For BlockContiguous,
/// `block_len` consecutive windows form one unit of the shuffle.
std::vector<Split> assign_split(std::size_t n, std::uint64_t seed, const SplitFractions& f,
                                SplitMode mode = SplitMode::PerWindow, std::size_t block_len = 10);

/// Windows per block so that blocks do not overlap in time.
std::size_t block_length(const WindowSpec& spec);

struct ManifestEntry {
  std::string session_id;
  std::size_t window_id = 0;  ///< 1-based ordinal in time order
  Awareness label = Awareness::LL;
  double start_s = 0.0;
  std::array<std::string, kNumChannels> paths;  ///< relative to the dataset root
  Split split = Split::Unassigned;

  std::string stem() const;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::string user_id;
  std::string session_id;
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  SplitMode split_mode = SplitMode::PerWindow;
  SplitFractions fractions;
  WindowSpec window_spec;
  EncoderSpec encoder_spec;
  ImageFormat image_format = ImageFormat::Png;
  int jpeg_quality = 95;
};

/// Zero-padded (4 digit minimum) file stem for a window ordinal.
std::string stem_for(std::size_t window_id);

struct BuildOptions {
  ImageFormat format = ImageFormat::Png;
  int jpeg_quality = 95;
  std::size_t jobs = 1;
};

/// Writes out_dir/<class>/<channel>/<stem>.<ext> for every window plus
/// manifest.jsonl and dataset.meta. The returned manifest is unsplit.
DatasetManifest build(const MultimodalRecord& rec, const WindowSpec& wspec, const EncoderSpec& espec,
                      const std::filesystem::path& out_dir, const BuildOptions& options = {});

/// Assigns splits to every entry. Throws EmptyDataset on an empty manifest.
DatasetManifest split(DatasetManifest manifest, std::uint64_t seed, const SplitFractions& f = {},
                      SplitMode mode = SplitMode::PerWindow);

/// Persists manifest.jsonl and dataset.meta under manifest.root.
void save_manifest(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& root);

/// Renders the JSON-lines body of manifest.jsonl.
std::string manifest_jsonl(const DatasetManifest& manifest);

struct DatasetSample {
  std::string session_id;
  std::size_t window_id = 0;
  Awareness label = Awareness::LL;
  Split split = Split::Unassigned;
  double start_s = 0.0;
  std::array<Matrix, kNumChannels> images;  ///< decoded to [0, 1]
};

/// Streams samples in window_id order, decoding the seven images of each.
class DatasetReader {
 public:
  explicit DatasetReader(DatasetManifest manifest);

  std::size_t size() const { return order_.size(); }
  /// Next sample, or nullopt at the end. Throws ManifestInconsistent when a
  /// referenced file is absent.
  std::optional<DatasetSample> next();
  DatasetSample read(std::size_t i) const;

 private:
  DatasetManifest manifest_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Convenience wrapper over DatasetReader.
std::vector<DatasetSample> load(const DatasetManifest& manifest);

}  // namespace physio
