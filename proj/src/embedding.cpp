#include "physio/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "physio/binio.hpp"
#include "physio/errors.hpp"
#include "physio/rng.hpp"

namespace physio {

Eigen::VectorXd FeatureExtractor::extract(const Matrix& image, const ImageKey& key) const {
  if (image.rows() != image.cols() || image.rows() == 0) {
    throw InvalidImage("image must be square and non-empty (got " + std::to_string(image.rows()) + "x" +
                       std::to_string(image.cols()) + ")");
  }
  if (!image.allFinite() || image.minCoeff() < 0.0 || image.maxCoeff() > 1.0) {
    throw InvalidImage("image entries must lie in [0,1]");
  }
  Eigen::VectorXd v = do_extract(image, key);
  if (static_cast<std::size_t>(v.size()) != output_dim() || !v.allFinite()) {
    throw NumericError("extractor " + name() + " produced an invalid vector");
  }
  return v;
}

BuiltinExtractor::BuiltinExtractor(std::uint64_t seed, std::size_t output_dim) : seed_(seed) {
  Rng rng(seed);
  const double scale = 2.0 / std::sqrt(static_cast<double>(kPooledDim));
  const auto rows = static_cast<Eigen::Index>(output_dim);
  projection_.resize(rows, static_cast<Eigen::Index>(kPooledDim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < projection_.cols(); ++j) projection_(i, j) = scale * rng.normal();
  }
  bias_.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) bias_(i) = 0.25 * rng.normal();
}

Eigen::VectorXd BuiltinExtractor::pool(const Matrix& image) {
  const auto n = static_cast<std::size_t>(image.rows());
  Eigen::VectorXd out(static_cast<Eigen::Index>(kPooledDim));
  Eigen::Index at = 0;
  auto edge = [n](std::size_t i, std::size_t g) { return i * n / g; };
  for (std::size_t g : kGrids) {
    for (std::size_t bi = 0; bi < g; ++bi) {
      const std::size_t r0 = std::min(edge(bi, g), n - 1);
      const std::size_t r1 = std::max(r0 + 1, edge(bi + 1, g));
      for (std::size_t bj = 0; bj < g; ++bj) {
        const std::size_t c0 = std::min(edge(bj, g), n - 1);
        const std::size_t c1 = std::max(c0 + 1, edge(bj + 1, g));
        out(at++) = image
                        .block(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(c0),
                               static_cast<Eigen::Index>(r1 - r0), static_cast<Eigen::Index>(c1 - c0))
                        .mean();
      }
    }
  }
  return out;
}

Eigen::VectorXd BuiltinExtractor::do_extract(const Matrix& image, const ImageKey& /*key*/) const {
  return (projection_ * pool(image) + bias_).array().tanh().matrix();
}

namespace {
constexpr std::string_view kSidecarMagic = "PEMB1";
constexpr std::string_view kPcaMagic = "PPCA1";
}  // namespace

ExternalExtractor::ExternalExtractor(const std::filesystem::path& sidecar) {
  ByteReader in = ByteReader::open(sidecar, kSidecarMagic);
  while (!in.done()) {
    std::string stem = in.str();
    const std::uint8_t tag = in.u8();
    if (tag >= kNumChannels) throw FormatError(sidecar.string() + ": bad channel tag " + std::to_string(tag));
    std::vector<float> values(kFeatureDim);
    for (float& v : values) v = in.f32();
    table_[{std::move(stem), static_cast<Channel>(tag)}] = std::move(values);
  }
}

Eigen::VectorXd ExternalExtractor::do_extract(const Matrix& /*image*/, const ImageKey& key) const {
  const auto it = table_.find({key.stem, key.channel});
  if (it == table_.end()) {
    throw InvalidImage("no external embedding for " + key.stem + "/" + std::string(folder_name(key.channel)));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(kFeatureDim));
  for (std::size_t i = 0; i < kFeatureDim; ++i) v(static_cast<Eigen::Index>(i)) = it->second[i];
  return v;
}

void write_embedding_sidecar(const std::filesystem::path& file, std::span<const EmbeddingRecord> records) {
  ByteWriter out(kSidecarMagic);
  for (const EmbeddingRecord& r : records) {
    if (r.values.size() != kFeatureDim) throw DimError("embedding record must hold 2048 values");
    out.str(r.stem);
    out.u8(static_cast<std::uint8_t>(index(r.channel)));
    for (float v : r.values) out.f32(v);
  }
  out.save(file);
}

Eigen::VectorXd extract_multimodal(std::span<const Matrix> images, const FeatureExtractor& ex,
                                   const std::string& stem) {
  if (images.size() != kNumChannels) {
    throw ChannelCountError("expected 7 channel images, got " + std::to_string(images.size()));
  }
  const auto dim = static_cast<Eigen::Index>(ex.output_dim());
  Eigen::VectorXd out(dim * static_cast<Eigen::Index>(kNumChannels));
  for (Channel c : kAllChannels) {
    out.segment(static_cast<Eigen::Index>(index(c)) * dim, dim) = ex.extract(images[index(c)], {stem, c});
  }
  return out;
}

Eigen::VectorXd PcaModel::explained_variance_ratio() const {
  if (!(total_variance > 0.0)) return Eigen::VectorXd::Zero(explained_variance.size());
  return explained_variance / total_variance;
}

PcaModel pca_fit(const Eigen::MatrixXd& rows, std::size_t k) {
  const auto n = static_cast<std::size_t>(rows.rows());
  const auto d = static_cast<std::size_t>(rows.cols());
  if (k == 0 || k > std::min(n, d)) {
    throw RankError("cannot fit " + std::to_string(k) + " components to " + std::to_string(n) + "x" +
                    std::to_string(d) + " data");
  }
  PcaModel m;
  m.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - m.mean.transpose();
  const double dof = static_cast<double>(std::max<std::size_t>(1, n - 1));

  const auto ki = static_cast<Eigen::Index>(k);
  m.total_variance = centered.squaredNorm() / dof;
  bool done = false;
  if (n < d) {
    // Wide data: eigenvectors of the n x n Gram matrix are far cheaper than
    // an SVD of the full matrix. V = X^T U / s.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rows.rows(), rows.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(centered);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.selfadjointView<Eigen::Lower>());
    const Eigen::VectorXd lambda = es.eigenvalues().reverse();
    if (es.info() == Eigen::Success && lambda(ki - 1) > 1e-10 * std::max(lambda(0), 1e-300)) {
      const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse().leftCols(ki);
      const Eigen::VectorXd s = lambda.head(ki).cwiseSqrt();
      m.components = (centered.transpose() * u * s.cwiseInverse().asDiagonal()).transpose();
      for (Eigen::Index r = 0; r < ki; ++r) m.components.row(r).normalize();
      m.explained_variance = lambda.head(ki) / dof;
      done = true;
    }
  }
  if (!done) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    m.components = svd.matrixV().leftCols(ki).transpose();
    m.explained_variance = s.head(ki).array().square() / dof;
  }

  for (Eigen::Index r = 0; r < ki; ++r) {
    Eigen::Index arg = 0;
    m.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (m.components(r, arg) < 0.0) m.components.row(r) *= -1.0;
  }
  return m;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.mean.size()) {
    throw DimError("PCA expects dimension " + std::to_string(model.mean.size()) + ", got " +
                   std::to_string(x.size()));
  }
  return model.components * (x - model.mean);
}

Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.mean.size()) {
    throw DimError("PCA expects dimension " + std::to_string(model.mean.size()) + ", got " +
                   std::to_string(rows.cols()));
  }
  return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.components.rows()) throw DimError("PCA reconstruct: wrong component count");
  return model.mean + model.components.transpose() * z;
}

void save_pca(const PcaModel& model, const std::filesystem::path& file) {
  ByteWriter out(kPcaMagic);
  out.u64(model.k());
  out.u64(model.dim());
  out.f64(model.total_variance);
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) out.f64(model.mean(i));
  for (Eigen::Index i = 0; i < model.explained_variance.size(); ++i) out.f64(model.explained_variance(i));
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.components.cols(); ++c) out.f64(model.components(r, c));
  }
  out.save(file);
}

PcaModel load_pca(const std::filesystem::path& file) {
  ByteReader in = ByteReader::open(file, kPcaMagic);
  const auto k = static_cast<Eigen::Index>(in.u64());
  const auto d = static_cast<Eigen::Index>(in.u64());
  PcaModel m;
  m.total_variance = in.f64();
  m.mean.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) m.mean(i) = in.f64();
  m.explained_variance.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) m.explained_variance(i) = in.f64();
  m.components.resize(k, d);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m.components(r, c) = in.f64();
  }
  return m;
}

}  // namespace physio
