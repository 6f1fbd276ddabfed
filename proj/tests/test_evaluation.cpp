#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "physio/errors.hpp"
#include "physio/evaluation.hpp"
#include "physio/kv.hpp"
#include "physio/rng.hpp"

using namespace physio;
namespace fs = std::filesystem;

namespace {

double boost_two_tailed(double t, double df) {
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

ConfusionMatrix random_cm(Rng& rng) {
  ConfusionMatrix cm;
  for (auto& row : cm.counts) {
    for (auto& c : row) c = rng.below(20);
  }
  cm.counts[0][0] += 1;
  return cm;
}

// Small feature sets whose class signal depends on a per-user permutation.
std::vector<FeatureSet> toy_users(std::size_t n_users, std::size_t windows, std::uint64_t seed) {
  std::vector<FeatureSet> users;
  for (std::size_t u = 0; u < n_users; ++u) {
    Rng rng(derive_seed(seed, u));
    FeatureSet f;
    f.user_id = std::to_string(u + 1);
    f.extractor = "toy";
    f.x.resize(static_cast<Eigen::Index>(windows), 12);
    for (std::size_t w = 0; w < windows; ++w) {
      const std::size_t c = w % kNumClasses;
      f.labels.push_back(kAllClasses[c]);
      f.window_ids.push_back(w + 1);
      for (Eigen::Index j = 0; j < 12; ++j) f.x(static_cast<Eigen::Index>(w), j) = static_cast<float>(0.3 * rng.normal());
      f.x(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>((c + u) % kNumClasses)) += 2.0f;
    }
    f.splits = assign_split(windows, seed, {});
    users.push_back(std::move(f));
  }
  return users;
}

ExperimentConfig quick() {
  ExperimentConfig c;
  c.runs = 2;
  c.pca_components = 6;
  c.train.max_epochs = 15;
  return c;
}

}  // namespace

TEST_CASE("metrics: diagonal and padded two-class matrix") {
  ConfusionMatrix d;
  for (std::size_t i = 0; i < 4; ++i) d.counts[i][i] = 5 + i;
  const Metrics m = metrics(d);
  CHECK(m.accuracy == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);

  ConfusionMatrix p;
  p.counts[0][0] = 1;
  p.counts[0][1] = 1;
  p.counts[1][1] = 2;
  const Metrics q = metrics(p);
  CHECK(q.accuracy == 0.75);
  CHECK(q.class_recall[0] == 0.5);
  CHECK(q.class_recall[1] == 1.0);
  CHECK(q.class_recall[2] == 0.0);
  // Precision 1 and 2/3, recall 0.5 and 1; empty classes add zeros.
  CHECK(q.recall == doctest::Approx(1.5 / 4.0));
  CHECK(q.precision == doctest::Approx((1.0 + 2.0 / 3.0) / 4.0));
  const double f0 = 2 * 1.0 * 0.5 / 1.5, f1 = 2 * (2.0 / 3.0) / (5.0 / 3.0);
  CHECK(q.f1 == doctest::Approx((f0 + f1) / 4.0));
  CHECK_THROWS_AS(metrics(ConfusionMatrix{}), EmptyEval);
}

TEST_CASE("metrics: random predictions near chance") {
  Rng rng(12);
  ConfusionMatrix cm;
  for (int i = 0; i < 10000; ++i) cm.add(kAllClasses[i % 4], kAllClasses[rng.below(4)]);
  CHECK(std::abs(metrics(cm).accuracy - 0.25) <= 0.05);
}

TEST_CASE("metrics: accuracy oracle and permutation invariance") {
  Rng rng(13);
  const std::size_t perm[4] = {3, 1, 0, 2};
  for (int trial = 0; trial < 200; ++trial) {
    const ConfusionMatrix cm = random_cm(rng);
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        total += cm.counts[i][j];
        correct += i == j ? cm.counts[i][j] : 0;
      }
    }
    const Metrics m = metrics(cm);
    CHECK(m.accuracy == static_cast<double>(correct) / static_cast<double>(total));
    ConfusionMatrix pc;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) pc.counts[perm[i]][perm[j]] = cm.counts[i][j];
    }
    const Metrics pm = metrics(pc);
    CHECK(pm.accuracy == doctest::Approx(m.accuracy).epsilon(1e-14));
    CHECK(pm.precision == doctest::Approx(m.precision).epsilon(1e-14));
    CHECK(pm.recall == doctest::Approx(m.recall).epsilon(1e-14));
    CHECK(pm.f1 == doctest::Approx(m.f1).epsilon(1e-14));
  }
}

TEST_CASE("summary statistics") {
  const std::vector<double> v = {0.9, 0.92, 0.94, 0.91, 0.93};
  const Summary s = summarize(v);
  CHECK(s.mean == doctest::Approx(0.92));
  CHECK(s.std == doctest::Approx(0.0158).epsilon(1e-2));
  const std::vector<double> one = {0.5};
  CHECK(summarize(one).single);
  CHECK(summarize(one).std == 0.0);
}

TEST_CASE("paired t-test against the Student-t oracle") {
  const std::vector<double> a = {1, 2, 3, 4, 5}, zero(5, 0.0);
  const TTestResult r = paired_ttest(a, zero);
  CHECK(r.t == doctest::Approx(4.2426).epsilon(1e-4));
  CHECK(r.df == 4.0);
  CHECK(std::abs(r.p - 0.0132) <= 1e-3);
  CHECK(std::abs(r.p - boost_two_tailed(r.t, 4.0)) <= 1e-10);
  CHECK_FALSE(r.degenerate);

  const TTestResult same = paired_ttest(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  std::vector<double> shifted = a;
  for (double& x : shifted) x += 1.0;
  const TTestResult shift = paired_ttest(shifted, a);
  CHECK(shift.p < 1e-12);
  CHECK(shift.degenerate);

  const std::vector<double> single = {1.0};
  CHECK_THROWS_AS(paired_ttest(single, single), InsufficientPairs);
  CHECK_THROWS_AS(paired_ttest(a, single), InsufficientPairs);
}

TEST_CASE("Student-t tail matches the oracle across a grid") {
  for (double df : {1.0, 2.0, 4.0, 7.5, 19.0, 60.0, 500.0}) {
    for (double t : {0.0, 0.1, 0.7, 1.5, 2.1, 4.0, 9.0, 25.0}) {
      CHECK(std::abs(student_t_two_tailed(t, df) - boost_two_tailed(t, df)) <= 1e-10);
      CHECK(student_t_two_tailed(-t, df) == student_t_two_tailed(t, df));
    }
  }
}

TEST_CASE("formatting") {
  CHECK(format_pct({0.9268, 0.0367, 5, false}) == "92.68 ± 3.67%");
  CHECK(format_p(0.0004) == "< 0.001");
  CHECK(format_p(0.0132) == "0.0132");
}

TEST_CASE("cross-user matrix: shape, reports, round trip") {
  const auto users = toy_users(4, 80, 1);
  const MatrixReport r = cross_user_matrix(users, quick());
  REQUIRE(r.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(r.cells[i][j].size() == 2);
  }
  CHECK(r.column_label(1) == "User 2");
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) CHECK(r.accuracy(i, j).mean < r.accuracy(i, i).mean);
    }
  }

  const fs::path out = oracle::fresh_dir(PHYSIO_SCRATCH);
  const std::string text = write_matrix_table(r, out);
  CHECK(text.find("*") != std::string::npos);
  const std::string csv = read_text(out / "table2.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  write_matrix_table(r, out);
  CHECK(read_text(out / "table2.csv") == csv);
  CHECK(read_text(out / "table2.txt") == text);

  const RunLog log = parse_runs_jsonl(runs_jsonl(r));
  REQUIRE(log.matrices.size() == 1);
  const fs::path again = oracle::fresh_dir(out / "again");
  emit_reports(log, again);
  CHECK(read_text(again / "table2.csv") == csv);
}

TEST_CASE("cross-user matrix: one user and empty splits") {
  const auto one = toy_users(1, 80, 2);
  const MatrixReport r = cross_user_matrix(one, quick());
  CHECK(r.size() == 1);
  CHECK(r.cells[0][0].size() == 2);

  auto users = toy_users(3, 80, 3);
  for (Split& s : users[1].splits) {
    if (s == Split::Test) s = Split::Train;
  }
  try {
    cross_user_matrix(users, quick());
    FAIL("expected EmptySplit");
  } catch (const EmptySplit& e) {
    CHECK(e.who == "2");
  }
}

TEST_CASE("combined matrix with two users equals cross-user training") {
  const auto users = toy_users(2, 80, 4);
  const MatrixReport cross = cross_user_matrix(users, quick());
  const MatrixReport comb = combined_matrix(users, quick());
  CHECK(comb.column_label(0) == "{2}");
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& a = comb.cells[i][j];
      const auto& b = cross.cells[i][1 - j];
      REQUIRE(a.size() == b.size());
      for (std::size_t r = 0; r < a.size(); ++r) CHECK(a[r].test.accuracy == b[r].test.accuracy);
    }
  }
  CHECK_THROWS_AS(combined_matrix(toy_users(1, 80, 4), quick()), ConfigError);
}

TEST_CASE("comparison report and its files") {
  const auto users = toy_users(4, 80, 5);
  const MatrixReport cross = cross_user_matrix(users, quick());
  const MatrixReport comb = combined_matrix(users, quick());
  CHECK(comb.column_label(0) == "{2, 3, 4}");
  const ComparisonReport c = compare(cross, comb);
  CHECK(c.personalized_summary[kAccuracy].n == 8);
  CHECK(c.tests[kAccuracy].df == 7.0);
  std::vector<double> a, b;
  for (std::size_t u = 0; u < 4; ++u) {
    for (std::size_t r = 0; r < 2; ++r) {
      a.push_back(cross.cells[u][u][r].test.accuracy);
      b.push_back(comb.cells[u][u][r].test.accuracy);
    }
  }
  CHECK(c.tests[kAccuracy].t == paired_ttest(a, b).t);

  const fs::path out = oracle::fresh_dir(fs::path(PHYSIO_SCRATCH) / "cmp");
  const std::string t4 = write_table4(c, out);
  CHECK(t4.find("Significance (p)") != std::string::npos);
  write_classwise_recall(c, out);
  const std::string csv = read_text(out / "table4.csv");
  const std::string rec = read_text(out / "classwise_recall.csv");
  write_table4(c, out);
  write_classwise_recall(c, out);
  CHECK(read_text(out / "table4.csv") == csv);
  CHECK(read_text(out / "classwise_recall.csv") == rec);

  MatrixReport short_runs = comb;
  short_runs.cells[0][0].pop_back();
  CHECK_THROWS_AS(compare(cross, short_runs), DimError);
}

TEST_CASE("encoder list") {
  std::vector<std::string> names;
  for (const EncoderSpec& e : table1_encoders()) names.push_back(e.display_name());
  CHECK(names == std::vector<std::string>{"Continuous RP", "Binary RP", "GASF", "GADF", "MTF-4", "MTF-128"});
}
