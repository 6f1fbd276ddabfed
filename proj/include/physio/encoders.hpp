#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "physio/signals.hpp"
#include "physio/types.hpp"

namespace physio {

/// Square image matrix. Stored encodings are in [0, 1].
using Matrix = Eigen::MatrixXd;

enum class EncoderKind { RpBinary, RpContinuous, Gasf, Gadf, Mtf };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::RpContinuous;
  double rp_threshold = 0.5;
  std::size_t mtf_states = 4;

  void validate() const;
  /// Short label used in reports: "Continuous RP", "MTF-128", ...
  std::string display_name() const;
};

/// CLI spelling: rp-binary, rp-continuous, gasf, gadf, mtf.
std::string_view name(EncoderKind k);
EncoderKind parse_encoder_kind(std::string_view s);

struct EncodedWindow {
  Matrix matrix;
  EncoderSpec encoder;
  Channel channel = Channel::AccX;
  double start_s = 0.0;
  Awareness label = Awareness::LL;
};

/// |x_i - x_j|.
Matrix rp_continuous(std::span<const double> x);

/// 1 where |x_i - x_j| <= threshold, else 0 (the boundary counts as recurrent).
Matrix rp_binary(std::span<const double> x, double threshold);

/// cos(phi_i + phi_j) with phi = arccos(x), before the [0,1] remap.
Matrix gasf_raw(std::span<const double> x);
/// sin(phi_i - phi_j), before the [0,1] remap.
Matrix gadf_raw(std::span<const double> x);
/// Raw fields remapped by (v + 1) / 2.
Matrix gasf(std::span<const double> x);
Matrix gadf(std::span<const double> x);

/// Quantile-binned first-order transition structure of one window.
struct MarkovStates {
  std::vector<std::size_t> state;  ///< per-sample state index, dense in [0, count)
  std::size_t count = 0;           ///< effective state count after collapsing empty bins
  Matrix transitions;              ///< count x count row-stochastic matrix
};

/// Bins x at its own k/Q quantiles (bin k is (edge_k, edge_k+1]); unoccupied
/// bins are dropped. Rows with no outgoing transition are uniform.
MarkovStates markov_states(std::span<const double> x, std::size_t states);

/// M(i, j) = W(q_i, q_j). Throws TooShort when x has fewer than 2 samples.
Matrix mtf(std::span<const double> x, std::size_t states);

/// Dispatches on spec.kind.
Matrix encode(std::span<const double> x, const EncoderSpec& spec);
EncodedWindow encode(const ScaledWindow& w, const EncoderSpec& spec);

/// 8-bit grayscale image, row-major, row 0 first.
struct Image8 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

/// pixel = floor(v * 255 + 0.5).
Image8 to_image(const Matrix& m);
/// pixel / 255.
Matrix from_image(const Image8& img);

}  // namespace physio
