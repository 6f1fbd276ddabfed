#include <doctest.h>

#include "oracles.hpp"
#include "physio/encoders.hpp"
#include "physio/errors.hpp"
#include "physio/rng.hpp"

using namespace physio;

namespace {

void check_matrix(const Matrix& got, const Matrix& want, double tol = 1e-12) {
  REQUIRE(got.rows() == want.rows());
  REQUIRE(got.cols() == want.cols());
  CHECK((got - want).cwiseAbs().maxCoeff() <= tol);
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("continuous RP worked example") {
  const std::vector<double> x = {0.0, 1.0};
  check_matrix(rp_continuous(x), mat({{0, 1}, {1, 0}}));
  const std::vector<double> flat(6, 0.3);
  CHECK(rp_continuous(flat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary RP worked example") {
  const std::vector<double> x = {0.0, 0.4, 1.0};
  check_matrix(rp_binary(x, 0.5), mat({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}));
  check_matrix(rp_binary(x, 1.0), Matrix::Ones(3, 3));
}

TEST_CASE("GASF and GADF worked examples") {
  const std::vector<double> x = {0.0, 1.0};
  check_matrix(gasf_raw(x), mat({{-1, 0}, {0, 1}}));
  check_matrix(gasf(x), mat({{0, 0.5}, {0.5, 1}}));
  check_matrix(gadf_raw(x), mat({{0, 1}, {-1, 0}}));
  check_matrix(gadf(x), mat({{0.5, 1}, {0, 0.5}}));
}

TEST_CASE("GAF domain") {
  const std::vector<double> bad = {0.2, 1.1};
  CHECK_THROWS_AS(gasf(bad), DomainError);
  CHECK_THROWS_AS(gadf(bad), DomainError);
  const std::vector<double> edge = {-1e-10, 1.0 + 1e-10};
  CHECK_NOTHROW(gasf(edge));
}

TEST_CASE("MTF worked examples") {
  const std::vector<double> alt = {0, 1, 0, 1};
  const MarkovStates a = markov_states(alt, 2);
  CHECK(a.count == 2);
  check_matrix(a.transitions, mat({{0, 1}, {1, 0}}));
  Matrix checker(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) checker(i, j) = (i % 2) != (j % 2) ? 1.0 : 0.0;
  }
  check_matrix(mtf(alt, 2), checker);

  const std::vector<double> ramp = {0, 1.0 / 3, 2.0 / 3, 1};
  const MarkovStates r = markov_states(ramp, 2);
  CHECK(r.state == std::vector<std::size_t>{0, 0, 1, 1});
  check_matrix(r.transitions, mat({{0.5, 0.5}, {0, 1}}));
  const Matrix m = mtf(ramp, 2);
  CHECK(std::abs(m(0, 2) - 0.5) <= 1e-12);
  CHECK(std::abs(m(2, 2) - 1.0) <= 1e-12);

  const std::vector<double> flat(10, 0.7);
  const MarkovStates f = markov_states(flat, 4);
  CHECK(f.count == 1);
  check_matrix(mtf(flat, 4), Matrix::Ones(10, 10));

  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(mtf(one, 4), TooShort);
}

TEST_CASE("encoder properties on random windows") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(40);
    for (double& v : x) v = rng.uniform();
    const Matrix rp = rp_continuous(x);
    check_matrix(rp, oracle::rp(x));
    CHECK((rp - rp.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rp.diagonal().cwiseAbs().maxCoeff() == 0.0);
    check_matrix(gasf_raw(x), oracle::gaf(x, true), 1e-12);
    check_matrix(gadf_raw(x), oracle::gaf(x, false), 1e-12);
    for (std::size_t q : {4UL, 128UL}) {
      const MarkovStates ms = markov_states(x, q);
      const Eigen::VectorXd sums = ms.transitions.rowwise().sum();
      CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-12);
      const Matrix m = mtf(x, q);
      CHECK(m.minCoeff() >= 0.0);
      CHECK(m.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("8-bit quantization") {
  Matrix m(1, 3);
  m << 0.0, 0.5, 1.0;
  const Image8 img = to_image(m);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 128, 255});
  const Matrix back = from_image(img);
  CHECK((back - m).cwiseAbs().maxCoeff() <= 1.0 / 510.0 + 1e-15);
}

TEST_CASE("encoder spec names and dispatch") {
  EncoderSpec s;
  CHECK(s.display_name() == "Continuous RP");
  s.kind = EncoderKind::Mtf;
  s.mtf_states = 128;
  CHECK(s.display_name() == "MTF-128");
  CHECK(parse_encoder_kind("gadf") == EncoderKind::Gadf);
  const std::vector<double> x = {0.0, 1.0};
  check_matrix(encode(x, EncoderSpec{EncoderKind::Gasf}), mat({{0, 0.5}, {0.5, 1}}));
}
