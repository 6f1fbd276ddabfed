// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "physio/classifier.hpp"
#include "physio/dataset.hpp"
#include "physio/embedding.hpp"
#include "physio/encoders.hpp"
#include "physio/errors.hpp"
#include "physio/evaluation.hpp"
#include "physio/kv.hpp"
#include "physio/pipeline.hpp"
#include "physio/rng.hpp"
#include "physio/synthgen.hpp"

using namespace physio;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream info;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PHYSIO_CLI) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

void encoder_math(Check& c) {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  const std::size_t n = 120;
  double worst_row = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(n);
    // Mix smooth and rough windows so MTF bins see both regimes.
    const double f = rng.uniform(0.01, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = trial % 2 == 0 ? rng.uniform() : 0.5 + 0.45 * std::sin(f * static_cast<double>(i)) + 0.05 * rng.uniform();
    }
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);

    const Matrix rc = rp_continuous(x);
    c.require(max_abs(rc - rc.transpose()) == 0.0, "continuous RP symmetry");
    c.require(rc.diagonal().cwiseAbs().maxCoeff() == 0.0, "continuous RP zero diagonal");
    c.require(max_abs(rc - oracle::rp(x)) <= 1e-12, "continuous RP entries");
    const Matrix rb = rp_binary(x, 0.5);
    c.require(max_abs(rb - rb.transpose()) == 0.0, "binary RP symmetry");
    c.require((rb.diagonal().array() == 1.0).all(), "binary RP unit diagonal");

    const Matrix gs = gasf_raw(x);
    c.require(max_abs(gs - gs.transpose()) <= 1e-15, "raw GASF symmetry");
    const Matrix gd = gadf_raw(x);
    c.require(max_abs(gd + gd.transpose()) <= 1e-15, "raw GADF antisymmetry");
    c.require(gd.diagonal().cwiseAbs().maxCoeff() == 0.0, "raw GADF zero diagonal");

    std::vector<Matrix> stored = {rc, rb, gasf(x), gadf(x)};
    for (std::size_t states : {4UL, 128UL}) {
      const MarkovStates ms = markov_states(x, states);
      const double dev = (ms.transitions.rowwise().sum().array() - 1.0).abs().maxCoeff();
      worst_row = std::max(worst_row, dev);
      c.require(dev <= 1e-12, "MTF row sums");
      stored.push_back(mtf(x, states));
    }
    for (const Matrix& m : stored) {
      c.require(m.rows() == static_cast<Eigen::Index>(n), "image side");
      c.require(m.minCoeff() >= 0.0 && m.maxCoeff() <= 1.0, "entries in [0, 1]");
    }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 30.0, "runtime under 30 s");
  c.info << "1000 windows, n=120, worst MTF row-sum deviation " << fmt("%.1e", worst_row) << ", "
         << fmt("%.2f", secs) << " s";
}

void hand_vectors(Check& c) {
  const std::vector<double> x01 = {0.0, 1.0};
  c.require(max_abs(rp_continuous(x01) - mat2(0, 1, 1, 0)) <= 1e-12, "RP on [0,1]");
  c.require(max_abs(gasf_raw(x01) - mat2(-1, 0, 0, 1)) <= 1e-12, "raw GASF on [0,1]");
  c.require(max_abs(gasf(x01) - mat2(0, 0.5, 0.5, 1)) <= 1e-12, "GASF on [0,1]");
  c.require(max_abs(gadf_raw(x01) - mat2(0, 1, -1, 0)) <= 1e-12, "raw GADF on [0,1]");
  c.require(max_abs(gadf(x01) - mat2(0.5, 1, 0, 0.5)) <= 1e-12, "GADF on [0,1]");

  const std::vector<double> rb = {0.0, 0.4, 1.0};
  Matrix want_rb(3, 3);
  want_rb << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  c.require(max_abs(rp_binary(rb, 0.5) - want_rb) <= 1e-12, "binary RP on [0,0.4,1]");

  const std::vector<double> alt = {0, 1, 0, 1};
  c.require(max_abs(markov_states(alt, 2).transitions - mat2(0, 1, 1, 0)) <= 1e-12, "MTF checkerboard W");
  Matrix checker(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) checker(i, j) = (i % 2) != (j % 2) ? 1.0 : 0.0;
  }
  c.require(max_abs(mtf(alt, 2) - checker) <= 1e-12, "MTF checkerboard M");

  const std::vector<double> ramp = {0, 1.0 / 3, 2.0 / 3, 1};
  const MarkovStates ms = markov_states(ramp, 2);
  c.require(ms.state == std::vector<std::size_t>{0, 0, 1, 1}, "MTF ramp states");
  c.require(max_abs(ms.transitions - mat2(0.5, 0.5, 0, 1)) <= 1e-12, "MTF ramp W");
  const Matrix m = mtf(ramp, 2);
  c.require(std::abs(m(0, 2) - 0.5) <= 1e-12 && std::abs(m(2, 2) - 1.0) <= 1e-12, "MTF ramp M");
  c.info << "RP, binary RP, GASF, GADF, MTF checkerboard and ramp within 1e-12";
}

void shape_contract(Check& c) {
  const auto t0 = Clock::now();
  const fs::path dir = oracle::fresh_dir(fs::path(PHYSIO_SCRATCH) / "shape");
  const UserProfile p = preset_cohort(1, 1.0, 0).front();
  const std::size_t n_windows = 160;
  const double T = preset_duration(n_windows);
  const MultimodalRecord rec = generate_session(p, T, preset_schedule({40, 40, 40, 40}, T, 1));

  // On-disk images from a short prefix of the session.
  MultimodalRecord head = rec;
  for (Signal& s : head.channels) s.values.resize(static_cast<std::size_t>(60.0 * s.fs));
  head.labels.resize(240);
  const DatasetManifest man = build(head, WindowSpec{}, EncoderSpec{}, dir / "ds");
  const Image8 img = read_image(dir / "ds" / man.entries.front().paths[0]);
  c.require(img.rows == 120 && img.cols == 120, "120x120 images");

  const BuiltinExtractor ex;
  c.require(ex.output_dim() == 2048, "2048 features per channel");
  FeaturizeOptions opts;
  const FeatureSet fset = featurize(rec, ex, opts);
  c.require(fset.size() == n_windows, "window count");
  c.require(fset.x.cols() == 14336, "14336-dim concatenation");

  const ProjectedData pd = project_for_training(fset, 100);
  c.require(pd.pca.components.rows() == 100 && pd.pca.components.cols() == 14336, "PCA basis 100x14336");
  c.require(pd.data.train.x.cols() == 100 && pd.data.test.x.cols() == 100, "100-dim PCA output");

  TrainConfig cfg;
  cfg.max_epochs = 3;
  const RunResult r = train(pd.data, cfg);
  const MlpModel& m = r.best;
  c.require(m.w1.rows() == 25 && m.w1.cols() == 100, "layer 100->25");
  c.require(m.w2.rows() == 10 && m.w2.cols() == 25, "layer 25->10");
  c.require(m.w3.rows() == 4 && m.w3.cols() == 10, "layer 10->4");
  c.require(forward(m, pd.data.test.x.row(0).transpose()).size() == 4, "4 class outputs");
  const double secs = seconds_since(t0);
  c.require(secs < 60.0, "smoke test under 60 s");
  c.info << img.rows << "x" << img.cols << " images, " << ex.output_dim() << " per channel, " << fset.x.cols()
         << " concatenated, PCA " << pd.data.train.x.cols() << ", MLP " << m.w1.cols() << "->" << m.w1.rows() << "->"
         << m.w2.rows() << "->" << m.w3.rows() << ", " << fmt("%.1f", secs) << " s";
}

void numerical_oracles(Check& c) {
  Rng rng(77);
  Eigen::MatrixXd x(50, 200);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  const std::size_t k = 20;
  const PcaModel pca = pca_fit(x, k);
  const auto [values, vectors] = oracle::jacobi_eigen(oracle::covariance(x));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
    Eigen::VectorXd ref = vectors.col(i);
    if (ref.dot(pca.components.row(i).transpose()) < 0) ref = -ref;
    worst = std::max(worst, (pca.components.row(i).transpose() - ref).cwiseAbs().maxCoeff());
  }
  c.require(worst <= 1e-8, "PCA components vs covariance eigenvectors");

  MlpModel m = MlpModel::he_init(6, 5);
  for (auto t : m.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) += 0.1 * rng.normal();
  }
  Eigen::MatrixXd bx(10, 6);
  for (Eigen::Index i = 0; i < bx.size(); ++i) bx(i) = rng.normal();
  std::vector<Awareness> by(10);
  for (auto& a : by) a = kAllClasses[rng.below(4)];
  const double fd = oracle::max_fd_relative_error(m, bx, by);
  c.require(fd < 1e-4, "backward vs central differences");

  const std::vector<double> d = {1, 2, 3, 4, 5}, zero(5, 0.0);
  const TTestResult t = paired_ttest(d, zero);
  const boost::math::students_t dist(4.0);
  const double p_ref = 2.0 * boost::math::cdf(boost::math::complement(dist, t.t));
  c.require(std::abs(t.t - 4.2426) <= 1e-3, "t statistic");
  c.require(std::abs(t.p - 0.0132) <= 1e-3 && std::abs(t.p - p_ref) <= 1e-10, "two-tailed p");
  c.info << "PCA max deviation " << fmt("%.1e", worst) << " (k=20 of 50x200), FD relative error " << fmt("%.1e", fd)
         << ", t=" << fmt("%.4f", t.t) << " p=" << fmt("%.4f", t.p);
}

void split_contract(Check& c) {
  for (std::size_t n : {10UL, 100UL, 2158UL}) {
    const auto want = oracle::split_counts(n);
    const SplitCounts sc = split_counts(n, {});
    c.require(sc.train == want[0] && sc.val == want[1] && sc.test == want[2], "counts for n=" + std::to_string(n));
    for (SplitMode mode : {SplitMode::PerWindow, SplitMode::BlockContiguous}) {
      const auto a = assign_split(n, 123, {}, mode);
      std::array<std::size_t, 3> got{};
      for (Split s : a) ++got[static_cast<std::size_t>(s)];
      c.require(got == want, "assignment counts for n=" + std::to_string(n));
      c.require(a == assign_split(n, 123, {}, mode), "same-seed reproducibility n=" + std::to_string(n));
    }
  }
  c.info << "n=10 -> 7/1/2, n=100 -> 70/15/15, n=2158 -> 1510/323/325, both split modes, same seed bit-exact";
}

struct CohortRun {
  bool ok = false;
  double seconds = 0.0;
  fs::path root;
};

CohortRun run_cohort(const fs::path& root) {
  CohortRun r;
  r.root = oracle::fresh_dir(root);
  const auto t0 = Clock::now();
  r.ok = cli("synth --out " + q(root / "data"), root / "synth.log") == 0 &&
         cli("compare --sessions " + q(root / "data") + " --out " + q(root / "res"), root / "compare.log") == 0;
  r.seconds = seconds_since(t0);
  return r;
}

void personalization(Check& c, const CohortRun& run) {
  c.require(run.ok, "synth and compare exit 0");
  if (!run.ok) return;
  const RunLog log = parse_runs_jsonl(read_text(run.root / "res" / "runs.jsonl"));
  const MatrixReport* cross = nullptr;
  const MatrixReport* comb = nullptr;
  for (const MatrixReport& m : log.matrices) (m.kind == MatrixKind::CrossUser ? cross : comb) = &m;
  c.require(cross != nullptr && comb != nullptr, "both matrices logged");
  if (!cross || !comb) return;
  const std::size_t n = cross->size();
  c.require(n == 4, "4 users");
  double diag_sum = 0.0, off_sum = 0.0, min_diag = 1.0, min_gap = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.require(cross->cells[i][i].size() == 5 && comb->cells[i][i].size() == 5, "5 runs per cell");
    const double d = cross->accuracy(i, i).mean;
    min_diag = std::min(min_diag, d);
    diag_sum += d;
    c.require(d >= 0.85, "diagonal >= 0.85 for user " + cross->users[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) off_sum += cross->accuracy(i, j).mean;
    }
    const double loo = comb->accuracy(i, i).mean;
    min_gap = std::min(min_gap, d - loo);
    c.require(loo <= d - 0.15, "leave-one-out <= personalized - 0.15 for user " + cross->users[i]);
  }
  const double diag = diag_sum / static_cast<double>(n);
  const double off = off_sum / static_cast<double>(n * (n - 1));
  c.require(off <= diag - 0.20, "mean off-diagonal <= diagonal - 0.20");
  const ComparisonReport cmp = compare(*cross, *comb);
  const double p = cmp.tests[kAccuracy].p;
  c.require(p < 0.05, "paired p < 0.05");
  c.require(run.seconds <= 600.0, "runtime <= 10 min");
  c.info << "min diagonal " << fmt("%.3f", min_diag) << ", mean diagonal " << fmt("%.3f", diag) << ", mean off-diagonal "
         << fmt("%.3f", off) << ", min personalized-LOO gap " << fmt("%.3f", min_gap) << ", p=" << fmt("%.2e", p)
         << ", " << fmt("%.0f", run.seconds) << " s";
}

CohortRun run_encoders(const fs::path& root) {
  CohortRun r;
  r.root = oracle::fresh_dir(root);
  const auto t0 = Clock::now();
  r.ok = cli("synth --preset distance --out " + q(root / "data"), root / "synth.log") == 0 &&
         cli("encoders --sessions " + q(root / "data") + " --out " + q(root / "res"), root / "encoders.log") == 0;
  r.seconds = seconds_since(t0);
  return r;
}

void encoder_comparison_check(Check& c, const CohortRun& run) {
  c.require(run.ok, "synth and encoders exit 0");
  if (!run.ok) return;
  const RunLog log = parse_runs_jsonl(read_text(run.root / "res" / "runs.jsonl"));
  const auto& rows = log.encoders;
  std::vector<std::string> names;
  for (const EncoderRow& r : rows) names.push_back(r.name);
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  c.require(sorted == std::vector<std::string>{"Binary RP", "Continuous RP", "GADF", "GASF", "MTF-128", "MTF-4"},
            "rows are exactly the six encoders");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    c.require(rows[i - 1].val_accuracy.mean >= rows[i].val_accuracy.mean, "descending order");
  }
  const std::string csv = read_text(run.root / "res" / "table1.csv");
  c.require(std::count(csv.begin(), csv.end(), '\n') == 7, "table1.csv has 6 rows");
  const auto pos = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
  c.require(pos("Continuous RP") < pos("GADF"), "Continuous RP ranks above GADF");
  c.info << "ranking:";
  for (const EncoderRow& r : rows) c.info << " " << r.name << " " << fmt("%.3f", r.val_accuracy.mean) << ";";
  c.info << " " << fmt("%.0f", run.seconds) << " s";
}

// runs.jsonl plus every CSV under dir, keyed by relative path.
std::map<std::string, std::string> machine_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const fs::path& p = e.path();
    if (e.is_regular_file() && (p.extension() == ".csv" || p.filename() == "runs.jsonl")) {
      out[fs::relative(p, dir).string()] = read_text(p);
    }
  }
  return out;
}

void determinism(Check& c, const CohortRun& cohort, const CohortRun& enc) {
  c.require(cohort.ok && enc.ok, "first runs succeeded");
  if (!cohort.ok || !enc.ok) return;
  const fs::path base = fs::path(PHYSIO_SCRATCH);
  const CohortRun cohort2 = run_cohort(base / "cohort_repeat");
  const CohortRun enc2 = run_encoders(base / "encoders_repeat");
  c.require(cohort2.ok && enc2.ok, "repeat runs succeeded");
  std::size_t files = 0;
  for (const auto& [a, b] : {std::pair{cohort.root, cohort2.root}, std::pair{enc.root, enc2.root}}) {
    const auto first = machine_outputs(a / "res");
    const auto second = machine_outputs(b / "res");
    c.require(first.size() == second.size() && !first.empty(), "same output files");
    for (const auto& [name, body] : first) {
      const auto it = second.find(name);
      c.require(it != second.end() && it->second == body, name + " byte-identical");
      ++files;
    }
    c.require(first.count("runs.jsonl") == 1, "runs.jsonl present");
  }
  c.info << files << " files (runs.jsonl and report CSVs of compare and encoders) byte-identical across reruns";
}

}  // namespace

int main() {
  const fs::path scratch = oracle::fresh_dir(PHYSIO_SCRATCH);
  CohortRun cohort, enc;
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"Encoder math suite", encoder_math},
      {"Hand-computed encoder vectors", hand_vectors},
      {"Pipeline shape contract", shape_contract},
      {"Numerical oracles", numerical_oracles},
      {"Split contract", split_contract},
      {"Synthetic personalization effect",
       [&](Check& c) {
         cohort = run_cohort(scratch / "cohort");
         personalization(c, cohort);
       }},
      {"Encoder comparison harness",
       [&](Check& c) {
         enc = run_encoders(scratch / "encoders");
         encoder_comparison_check(c, enc);
       }},
      {"Determinism", [&](Check& c) { determinism(c, cohort, enc); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool pass = c.failures.empty();
    failed += pass ? 0 : 1;
    std::printf("%s [%zu] %s: %s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), c.info.str().c_str());
    for (std::size_t k = 0; k < std::min<std::size_t>(c.failures.size(), 10); ++k) {
      std::printf("       failed: %s\n", c.failures[k].c_str());
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
