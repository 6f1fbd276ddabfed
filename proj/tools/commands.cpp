#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "physio/errors.hpp"
#include "physio/kv.hpp"

namespace physio::cli {

namespace fs = std::filesystem;

namespace {

void log(const std::string& msg) { std::fprintf(stderr, "[physio] %s\n", msg.c_str()); }

fs::path out_dir(const RunConfig& cfg) {
  const fs::path out = cfg.get("out");
  fs::create_directories(out);
  return out;
}

void snapshot(const RunConfig& cfg, const fs::path& out) { cfg.write_snapshot(out / "run_config.txt"); }

// Subdirectories in name order, numeric suffixes compared as numbers so that
// user_10 follows user_9.
std::vector<fs::path> subdirs(const fs::path& dir, const std::string& must_contain) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / must_contain)) out.push_back(e.path());
  }
  auto key = [](const fs::path& p) {
    const std::string s = p.filename().string();
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
    unsigned long long n = 0;
    std::from_chars(s.data() + i, s.data() + s.size(), n);
    return std::make_tuple(s.substr(0, i), i == s.size() ? 0ULL : n + 1, s);
  };
  std::sort(out.begin(), out.end(), [&](const fs::path& a, const fs::path& b) { return key(a) < key(b); });
  if (out.empty()) throw IoError("no entries with " + must_contain + " under " + dir.string());
  return out;
}

std::unique_ptr<FeatureExtractor> make_extractor(const RunConfig& cfg) {
  if (cfg.get("extractor") == "external") {
    if (cfg.get("embeddings").empty()) throw ConfigError("extractor=external needs embeddings=<sidecar>");
    return std::make_unique<ExternalExtractor>(cfg.get("embeddings"));
  }
  return std::make_unique<BuiltinExtractor>(cfg.count("extractor_seed"));
}

std::vector<FeatureSet> load_users(const RunConfig& cfg) {
  std::vector<FeatureSet> users;
  if (!cfg.get("features").empty()) {
    const fs::path dir = cfg.get("features");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".pfea") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) users.push_back(load_features(f));
    if (users.empty()) throw IoError("no .pfea files under " + dir.string());
  } else {
    const FeaturizeOptions opts = cfg.featurize_options();
    const auto ex = make_extractor(cfg);
    for (const fs::path& dir : subdirs(cfg.get("sessions"), "labels.csv")) {
      const MultimodalRecord rec = load_session(dir);
      users.push_back(featurize(rec, *ex, opts));
      log("featurized user " + users.back().user_id + ": " + std::to_string(users.back().size()) + " windows");
    }
  }
  std::stable_sort(users.begin(), users.end(), [](const FeatureSet& a, const FeatureSet& b) {
    long long na = 0, nb = 0;
    const bool ia = std::from_chars(a.user_id.data(), a.user_id.data() + a.user_id.size(), na).ec == std::errc();
    const bool ib = std::from_chars(b.user_id.data(), b.user_id.data() + b.user_id.size(), nb).ec == std::errc();
    if (ia && ib && na != nb) return na < nb;
    return a.user_id < b.user_id;
  });
  return users;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void print(const std::string& text) { std::fputs(text.c_str(), stdout); }

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  const SynthOptions opts = cfg.synth_options();
  const fs::path out = out_dir(cfg);
  const auto sessions = preset_sessions(opts);
  for (const MultimodalRecord& rec : sessions) {
    const fs::path dir = out / ("user_" + rec.user_id);
    write_session(rec, dir);
    log("wrote session " + dir.string() + " (" + fixed(rec.channels[0].end_time(), 0) + " s)");
  }
  snapshot(cfg, out);
  print("synthesized " + std::to_string(sessions.size()) + " session(s) under " + out.string() + "\n");
}

void cmd_encode(const RunConfig& cfg) {
  const WindowSpec wspec = cfg.window_spec();
  const EncoderSpec espec = cfg.encoder_spec();
  const BuildOptions build_opts = cfg.build_options();
  const SplitFractions fractions = cfg.split_fractions();
  const SplitMode mode = cfg.split_mode();
  const fs::path out = out_dir(cfg);
  std::vector<fs::path> dirs;
  if (!cfg.get("session").empty()) {
    dirs.push_back(cfg.get("session"));
  } else {
    dirs = subdirs(cfg.get("sessions"), "labels.csv");
  }
  for (const fs::path& dir : dirs) {
    const MultimodalRecord rec = load_session(dir);
    const fs::path target = out / dir.filename();
    DatasetManifest m = build(rec, wspec, espec, target, build_opts);
    m = split(m, cfg.count("seed"), fractions, mode);
    save_manifest(m);
    std::array<std::size_t, 3> n{};
    for (const ManifestEntry& e : m.entries) ++n[static_cast<std::size_t>(e.split)];
    print("user " + m.user_id + ": " + std::to_string(m.entries.size()) + " windows, " +
          std::to_string(m.entries.size() * kNumChannels) + " images (train " + std::to_string(n[0]) + ", val " +
          std::to_string(n[1]) + ", test " + std::to_string(n[2]) + ") -> " + target.string() + "\n");
  }
  snapshot(cfg, out);
}

void cmd_features(const RunConfig& cfg) {
  if (cfg.get("datasets").empty()) throw ConfigError("features needs datasets=<dir>");
  const auto ex = make_extractor(cfg);
  const fs::path out = out_dir(cfg);
  const std::size_t jobs = std::max<std::uint64_t>(1, cfg.count("jobs"));
  for (const fs::path& dir : subdirs(cfg.get("datasets"), "manifest.jsonl")) {
    const DatasetManifest m = load_manifest(dir);
    const FeatureSet fset = featurize(m, *ex, jobs);
    const fs::path file = out / (dir.filename().string() + ".pfea");
    save_features(fset, file);
    print("user " + fset.user_id + ": " + std::to_string(fset.size()) + " x " + std::to_string(fset.x.cols()) +
          " features (" + ex->name() + ") -> " + file.string() + "\n");
  }
  snapshot(cfg, out);
}

void cmd_train(const RunConfig& cfg) {
  const ExperimentConfig ecfg = cfg.experiment_config();
  const fs::path out = out_dir(cfg);
  const std::vector<FeatureSet> users = load_users(cfg);
  const auto it = std::find_if(users.begin(), users.end(),
                               [&](const FeatureSet& f) { return f.user_id == cfg.get("user"); });
  if (it == users.end()) throw ConfigError("no user '" + cfg.get("user") + "' in the inputs");

  const ProjectedData p = project_for_training(*it, ecfg.pca_components);
  const RepeatSummary rs = repeat_runs(p.data, ecfg.train, ecfg.runs, ecfg.jobs);
  save_pca(p.pca, out / "pca.ppca");
  save_checkpoint(rs.runs.front().best, ecfg.train, out / "model.pmlp");

  std::string epochs = "run,seed,epoch,train_loss,val_f1\n";
  std::string jsonl;
  for (std::size_t r = 0; r < rs.runs.size(); ++r) {
    const RunResult& run = rs.runs[r];
    for (std::size_t e = 0; e < run.train_loss.size(); ++e) {
      epochs += std::to_string(r) + "," + std::to_string(run.seed) + "," + std::to_string(e + 1) + "," +
                format_double(run.train_loss[e]) + "," + format_double(run.val_f1[e]) + "\n";
    }
    nlohmann::ordered_json j;
    j["experiment"] = "train";
    j["user"] = it->user_id;
    j["run"] = r;
    j["seed"] = run.seed;
    j["best_epoch"] = run.best_epoch;
    j["val_f1"] = run.val.f1;
    j["test_accuracy"] = run.test.accuracy;
    j["test_precision"] = run.test.precision;
    j["test_recall"] = run.test.recall;
    j["test_f1"] = run.test.f1;
    j["test_class_recall"] = run.test.class_recall;
    jsonl += j.dump() + "\n";
  }
  write_text(out / "epochs.csv", epochs);
  write_text(out / "runs.jsonl", jsonl);

  std::string text = "Personalized model, user " + it->user_id + " (" + std::to_string(rs.runs.size()) + " run" +
                     (rs.runs.size() == 1 ? "" : "s") + ")\n\n";
  text += "accuracy   " + format_pct(rs.accuracy) + "\n";
  text += "precision  " + format_pct(rs.precision) + "\n";
  text += "recall     " + format_pct(rs.recall) + "\n";
  text += "f1         " + format_pct(rs.f1) + "\n";
  if (rs.single_run) text += "\nsingle run: std reported as 0 by convention\n";
  write_text(out / "train_summary.txt", text);
  snapshot(cfg, out);
  print(text);
}

void cmd_xmatrix(const RunConfig& cfg) {
  const ExperimentConfig ecfg = cfg.experiment_config();
  const fs::path out = out_dir(cfg);
  const MatrixReport r = cross_user_matrix(load_users(cfg), ecfg);
  write_text(out / "runs.jsonl", runs_jsonl(r));
  snapshot(cfg, out);
  print(write_matrix_table(r, out));
}

void cmd_combined(const RunConfig& cfg) {
  const ExperimentConfig ecfg = cfg.experiment_config();
  const fs::path out = out_dir(cfg);
  const MatrixReport r = combined_matrix(load_users(cfg), ecfg);
  write_text(out / "runs.jsonl", runs_jsonl(r));
  snapshot(cfg, out);
  print(write_matrix_table(r, out));
}

void cmd_compare(const RunConfig& cfg) {
  const ExperimentConfig ecfg = cfg.experiment_config();
  const fs::path out = out_dir(cfg);
  const std::vector<FeatureSet> users = load_users(cfg);
  const MatrixReport cross = cross_user_matrix(users, ecfg);
  log("cross-user matrix done");
  const MatrixReport comb = combined_matrix(users, ecfg);
  log("combined matrix done");
  write_text(out / "runs.jsonl", runs_jsonl(cross) + runs_jsonl(comb));
  snapshot(cfg, out);
  const ComparisonReport c = compare(cross, comb);
  std::string text = write_matrix_table(cross, out) + "\n" + write_matrix_table(comb, out) + "\n";
  text += write_table4(c, out);
  write_classwise_recall(c, out);
  print(text);
}

void cmd_report(const RunConfig& cfg) {
  const fs::path runs = cfg.get("runs_file").empty() ? fs::path(cfg.get("out")) / "runs.jsonl"
                                                     : fs::path(cfg.get("runs_file"));
  const RunLog log_data = parse_runs_jsonl(read_text(runs));
  if (log_data.encoders.empty() && log_data.matrices.empty()) {
    throw FormatError(runs.string() + " holds no experiment runs");
  }
  print(emit_reports(log_data, out_dir(cfg)));
}

void cmd_encoders(const RunConfig& cfg) {
  const ExperimentConfig ecfg = cfg.experiment_config();
  const FeaturizeOptions opts = cfg.featurize_options();
  const fs::path out = out_dir(cfg);
  const fs::path session =
      cfg.get("session").empty() ? subdirs(cfg.get("sessions"), "labels.csv").front() : fs::path(cfg.get("session"));
  const MultimodalRecord rec = load_session(session);
  const auto ex = make_extractor(cfg);
  const auto rows = encoder_comparison(rec, table1_encoders(), opts, *ex, ecfg);
  write_text(out / "runs.jsonl", runs_jsonl(rows));
  snapshot(cfg, out);
  print(write_table1(rows, out));
}

}  // namespace physio::cli
