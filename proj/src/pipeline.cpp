#include "physio/pipeline.hpp"

#include <algorithm>

#include "physio/binio.hpp"
#include "physio/errors.hpp"
#include "physio/parallel.hpp"

namespace physio {

namespace {

constexpr std::string_view kFeatureMagic = "PFEA1";

std::vector<Eigen::Index> rows_of(const FeatureSet& fs, Split s) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs.splits[i] == s) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

// Row-stacks the chosen split of several users.
LabeledData gather(const std::vector<const FeatureSet*>& users, Split s) {
  std::size_t n = 0;
  Eigen::Index d = 0;
  for (const FeatureSet* fs : users) {
    n += fs->count(s);
    d = fs->x.cols();
  }
  LabeledData out;
  out.x.resize(static_cast<Eigen::Index>(n), d);
  out.y.reserve(n);
  Eigen::Index at = 0;
  for (const FeatureSet* fs : users) {
    if (fs->x.cols() != d) throw DimError("users have different feature widths");
    for (Eigen::Index r : rows_of(*fs, s)) {
      out.x.row(at++) = fs->x.row(r).cast<double>();
      out.y.push_back(fs->labels[static_cast<std::size_t>(r)]);
    }
  }
  return out;
}

LabeledData apply_pca(const LabeledData& raw, const PcaModel& pca) {
  return {pca_transform_rows(pca, raw.x), raw.y};
}

}  // namespace

std::size_t FeatureSet::count(Split s) const {
  return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s));
}

LabeledData FeatureSet::subset(Split s) const { return gather({this}, s); }

FeatureSet featurize(const MultimodalRecord& rec, const FeatureExtractor& ex, const FeaturizeOptions& options) {
  options.window.validate();
  options.encoder.validate();
  const auto groups = windows(synchronize(rec, options.window.fs), options.window);
  if (groups.empty()) throw EmptyDataset("session " + rec.session_id + " yields no windows");

  FeatureSet fs;
  fs.user_id = rec.user_id;
  fs.extractor = ex.name();
  const auto dim = static_cast<Eigen::Index>(ex.output_dim() * kNumChannels);
  fs.x.resize(static_cast<Eigen::Index>(groups.size()), dim);
  fs.labels.resize(groups.size());
  fs.window_ids.resize(groups.size());
  parallel_for(groups.size(), options.jobs, [&](std::size_t k) {
    const WindowGroup& g = groups[k];
    std::array<Matrix, kNumChannels> images;
    for (Channel c : kAllChannels) {
      images[index(c)] = from_image(to_image(encode(g.channels[index(c)].values, options.encoder)));
    }
    fs.x.row(static_cast<Eigen::Index>(k)) = extract_multimodal(images, ex, stem_for(g.ordinal + 1)).cast<float>();
    fs.labels[k] = g.label;
    fs.window_ids[k] = g.ordinal + 1;
  });
  fs.splits = assign_split(groups.size(), options.split_seed, options.fractions, options.split_mode,
                           block_length(options.window));
  return fs;
}

FeatureSet featurize(const DatasetManifest& manifest, const FeatureExtractor& ex, std::size_t jobs) {
  DatasetReader reader(manifest);
  const std::size_t n = reader.size();
  if (n == 0) throw EmptyDataset("dataset at " + manifest.root.string() + " is empty");
  FeatureSet fs;
  fs.user_id = manifest.user_id;
  fs.extractor = ex.name();
  fs.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ex.output_dim() * kNumChannels));
  fs.labels.resize(n);
  fs.splits.resize(n);
  fs.window_ids.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const DatasetSample s = reader.read(i);
    fs.x.row(static_cast<Eigen::Index>(i)) = extract_multimodal(s.images, ex, stem_for(s.window_id)).cast<float>();
    fs.labels[i] = s.label;
    fs.splits[i] = s.split;
    fs.window_ids[i] = s.window_id;
  });
  return fs;
}

void save_features(const FeatureSet& fs, const std::filesystem::path& file) {
  ByteWriter out(kFeatureMagic);
  out.str(fs.user_id);
  out.str(fs.extractor);
  out.u64(fs.size());
  out.u64(static_cast<std::uint64_t>(fs.x.cols()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out.u8(static_cast<std::uint8_t>(index(fs.labels[i])));
    out.u8(static_cast<std::uint8_t>(fs.splits[i]));
    out.u64(fs.window_ids[i]);
    for (Eigen::Index j = 0; j < fs.x.cols(); ++j) out.f32(fs.x(static_cast<Eigen::Index>(i), j));
  }
  out.save(file);
}

FeatureSet load_features(const std::filesystem::path& file) {
  ByteReader in = ByteReader::open(file, kFeatureMagic);
  FeatureSet fs;
  fs.user_id = in.str();
  fs.extractor = in.str();
  const std::uint64_t n = in.u64();
  const std::uint64_t d = in.u64();
  if (d == 0 || d > (1u << 24) || n > (1u << 24)) throw FormatError(file.string() + ": implausible shape");
  fs.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  fs.labels.resize(n);
  fs.splits.resize(n);
  fs.window_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t label = in.u8();
    const std::uint8_t split = in.u8();
    if (label >= kNumClasses || split > static_cast<std::uint8_t>(Split::Unassigned)) {
      throw FormatError(file.string() + ": bad label or split tag in row " + std::to_string(i));
    }
    fs.labels[i] = static_cast<Awareness>(label);
    fs.splits[i] = static_cast<Split>(split);
    fs.window_ids[i] = in.u64();
    for (Eigen::Index j = 0; j < fs.x.cols(); ++j) fs.x(static_cast<Eigen::Index>(i), j) = in.f32();
  }
  if (!in.done()) throw FormatError(file.string() + ": trailing bytes");
  return fs;
}

ProjectedData project_for_training(const FeatureSet& fs, std::size_t components) {
  const LabeledData train = fs.subset(Split::Train);
  if (train.size() == 0) throw EmptySplit(fs.user_id, "no training windows");
  ProjectedData out;
  out.pca = pca_fit(train.x, components);
  out.data.train = apply_pca(train, out.pca);
  out.data.val = project_split(fs, Split::Val, out.pca);
  out.data.test = project_split(fs, Split::Test, out.pca);
  return out;
}

ProjectedData project_pooled(const std::vector<const FeatureSet*>& users, std::size_t components) {
  const LabeledData train = gather(users, Split::Train);
  if (train.size() == 0) throw EmptySplit("pooled", "no training windows");
  ProjectedData out;
  out.pca = pca_fit(train.x, components);
  out.data.train = apply_pca(train, out.pca);
  out.data.val = apply_pca(gather(users, Split::Val), out.pca);
  return out;
}

LabeledData project_split(const FeatureSet& fs, Split s, const PcaModel& pca) {
  return apply_pca(fs.subset(s), pca);
}

}  // namespace physio
