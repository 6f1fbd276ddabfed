#include "physio/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "physio/errors.hpp"

namespace physio {

void EncoderSpec::validate() const {
  if (mtf_states < 1) throw InvalidSpec("mtf_states must be >= 1");
  if (!(rp_threshold > 0.0)) throw InvalidSpec("rp_threshold must be > 0");
}

std::string EncoderSpec::display_name() const {
  switch (kind) {
    case EncoderKind::RpContinuous: return "Continuous RP";
    case EncoderKind::RpBinary: return "Binary RP";
    case EncoderKind::Gasf: return "GASF";
    case EncoderKind::Gadf: return "GADF";
    case EncoderKind::Mtf: return "MTF-" + std::to_string(mtf_states);
  }
  return "?";
}

std::string_view name(EncoderKind k) {
  switch (k) {
    case EncoderKind::RpBinary: return "rp-binary";
    case EncoderKind::RpContinuous: return "rp-continuous";
    case EncoderKind::Gasf: return "gasf";
    case EncoderKind::Gadf: return "gadf";
    case EncoderKind::Mtf: return "mtf";
  }
  return "?";
}

EncoderKind parse_encoder_kind(std::string_view s) {
  for (auto k : {EncoderKind::RpBinary, EncoderKind::RpContinuous, EncoderKind::Gasf,
                 EncoderKind::Gadf, EncoderKind::Mtf}) {
    if (s == name(k)) return k;
  }
  throw ParseError("unknown encoder '" + std::string(s) + "'");
}

Matrix rp_continuous(std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = std::abs(x[i] - x[j]);
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

Matrix rp_binary(std::span<const double> x, double threshold) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = threshold - std::abs(x[i] - x[j]) >= 0.0 ? 1.0 : 0.0;
      m(i, j) = r;
      m(j, i) = r;
    }
  }
  return m;
}

namespace {

std::vector<double> polar_angles(std::span<const double> x) {
  constexpr double kTol = 1e-9;
  std::vector<double> phi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -kTol && x[i] <= 1.0 + kTol)) {
      throw DomainError("GAF input out of [0,1] at index " + std::to_string(i) + ": " +
                        std::to_string(x[i]));
    }
    phi[i] = std::acos(std::clamp(x[i], 0.0, 1.0));
  }
  return phi;
}

}  // namespace

Matrix gasf_raw(std::span<const double> x) {
  const auto phi = polar_angles(x);
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = std::cos(phi[i] + phi[j]);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Matrix gadf_raw(std::span<const double> x) {
  const auto phi = polar_angles(x);
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::sin(phi[i] - phi[j]);
      m(i, j) = v;
      m(j, i) = -v;
    }
  }
  return m;
}

Matrix gasf(std::span<const double> x) { return ((gasf_raw(x).array() + 1.0) * 0.5).matrix(); }
Matrix gadf(std::span<const double> x) { return ((gadf_raw(x).array() + 1.0) * 0.5).matrix(); }

MarkovStates markov_states(std::span<const double> x, std::size_t states) {
  if (x.size() < 2) throw TooShort("MTF needs at least 2 samples");
  if (states < 1) throw InvalidSpec("mtf_states must be >= 1");

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  edges.reserve(states);
  for (std::size_t k = 1; k < states; ++k) {
    edges.push_back(
        percentile_sorted(sorted, 100.0 * static_cast<double>(k) / static_cast<double>(states)));
  }
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  // Raw bin = number of edges strictly below the value.
  std::vector<std::size_t> raw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    raw[i] = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x[i]) - edges.begin());
  }
  // Dense relabel over occupied bins, preserving order.
  std::vector<std::size_t> dense(edges.size() + 1, 0);
  std::vector<bool> used(edges.size() + 1, false);
  for (std::size_t b : raw) used[b] = true;
  std::size_t count = 0;
  for (std::size_t b = 0; b < used.size(); ++b) {
    if (used[b]) dense[b] = count++;
  }

  MarkovStates out;
  out.count = count;
  out.state.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.state[i] = dense[raw[i]];

  const auto q = static_cast<Eigen::Index>(count);
  out.transitions = Matrix::Zero(q, q);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    out.transitions(static_cast<Eigen::Index>(out.state[i]),
                    static_cast<Eigen::Index>(out.state[i + 1])) += 1.0;
  }
  for (Eigen::Index a = 0; a < q; ++a) {
    const double total = out.transitions.row(a).sum();
    if (total > 0.0) {
      out.transitions.row(a) /= total;
    } else {
      out.transitions.row(a).setConstant(1.0 / static_cast<double>(q));
    }
  }
  return out;
}

Matrix mtf(std::span<const double> x, std::size_t states) {
  const MarkovStates ms = markov_states(x, states);
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = ms.transitions(static_cast<Eigen::Index>(ms.state[i]),
                               static_cast<Eigen::Index>(ms.state[j]));
    }
  }
  return m;
}

Matrix encode(std::span<const double> x, const EncoderSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EncoderKind::RpContinuous: return rp_continuous(x);
    case EncoderKind::RpBinary: return rp_binary(x, spec.rp_threshold);
    case EncoderKind::Gasf: return gasf(x);
    case EncoderKind::Gadf: return gadf(x);
    case EncoderKind::Mtf: return mtf(x, spec.mtf_states);
  }
  return {};
}

EncodedWindow encode(const ScaledWindow& w, const EncoderSpec& spec) {
  EncodedWindow e;
  e.matrix = encode(w.values, spec);
  e.encoder = spec;
  e.channel = w.channel;
  e.start_s = w.start_s;
  e.label = w.label;
  return e;
}

Image8 to_image(const Matrix& m) {
  Image8 img;
  img.rows = static_cast<std::size_t>(m.rows());
  img.cols = static_cast<std::size_t>(m.cols());
  img.pixels.resize(img.rows * img.cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = std::clamp(m(i, j), 0.0, 1.0);
      img.pixels[static_cast<std::size_t>(i) * img.cols + static_cast<std::size_t>(j)] =
          static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
    }
  }
  return img;
}

Matrix from_image(const Image8& img) {
  Matrix m(static_cast<Eigen::Index>(img.rows), static_cast<Eigen::Index>(img.cols));
  for (std::size_t i = 0; i < img.rows; ++i) {
    for (std::size_t j = 0; j < img.cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(img.pixels[i * img.cols + j]) / 255.0;
    }
  }
  return m;
}

}  // namespace physio
