#include "physio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "physio/errors.hpp"
#include "physio/kv.hpp"

namespace physio {

namespace {

using json = nlohmann::ordered_json;

void check_splits(const FeatureSet& fs) {
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    if (fs.count(s) == 0) throw EmptySplit(fs.user_id, "no " + std::string(name(s)) + " windows");
  }
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

// Left-aligned columns separated by two spaces, with a rule under the header.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], display_width(r[c]));
  }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      line += rows[i][c];
      if (c + 1 < rows[i].size()) line.append(width[c] - display_width(rows[i][c]) + 2, ' ');
    }
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out.append(total - 2, '-');
      out += "\n";
    }
  }
  return out;
}

std::vector<double> collect(std::span<const RunRecord> runs, MetricId id) {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const RunRecord& r : runs) v.push_back(metric_value(r.test, id));
  return v;
}

json metrics_json(const Metrics& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["class_precision"] = m.class_precision;
  j["class_recall"] = m.class_recall;
  j["class_f1"] = m.class_f1;
  return j;
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.class_precision = j.at("class_precision").get<ClassValues>();
  m.class_recall = j.at("class_recall").get<ClassValues>();
  m.class_f1 = j.at("class_f1").get<ClassValues>();
  return m;
}

void rank(std::vector<EncoderRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const EncoderRow& a, const EncoderRow& b) {
    return a.val_accuracy.mean > b.val_accuracy.mean;
  });
}

MatrixKind parse_matrix_kind(std::string_view s) {
  if (s == "cross-user") return MatrixKind::CrossUser;
  if (s == "combined") return MatrixKind::Combined;
  throw ParseError("unknown experiment '" + std::string(s) + "'");
}

}  // namespace

std::string_view name(MatrixKind k) { return k == MatrixKind::CrossUser ? "cross-user" : "combined"; }

Summary MatrixReport::accuracy(std::size_t tested, std::size_t trained) const {
  return summarize(collect(cells.at(tested).at(trained), kAccuracy));
}

std::string MatrixReport::column_label(std::size_t trained) const {
  if (kind == MatrixKind::CrossUser) return "User " + users.at(trained);
  std::string s = "{";
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (u == trained) continue;
    if (s.size() > 1) s += ", ";
    s += users[u];
  }
  return s + "}";
}

double metric_value(const Metrics& m, MetricId id) {
  switch (id) {
    case kAccuracy: return m.accuracy;
    case kPrecision: return m.precision;
    case kRecall: return m.recall;
    case kF1: return m.f1;
  }
  return 0.0;
}

MatrixReport cross_user_matrix(const std::vector<FeatureSet>& users, const ExperimentConfig& cfg) {
  if (users.empty()) throw EmptyDataset("cross-user matrix needs at least one user");
  for (const FeatureSet& fs : users) check_splits(fs);
  const std::size_t n = users.size();
  MatrixReport report;
  report.kind = MatrixKind::CrossUser;
  for (const FeatureSet& fs : users) report.users.push_back(fs.user_id);
  report.cells.assign(n, std::vector<std::vector<RunRecord>>(n));

  for (std::size_t j = 0; j < n; ++j) {
    const ProjectedData p = project_for_training(users[j], cfg.pca_components);
    const RepeatSummary rs = repeat_runs(p.data, cfg.train, cfg.runs, cfg.jobs);
    for (std::size_t i = 0; i < n; ++i) {
      const LabeledData test = i == j ? p.data.test : project_split(users[i], Split::Test, p.pca);
      for (std::size_t r = 0; r < rs.runs.size(); ++r) {
        const RunResult& run = rs.runs[r];
        report.cells[i][j].push_back({r, run.seed, run.best_epoch, metrics(evaluate(run.best, test))});
      }
    }
  }
  return report;
}

MatrixReport combined_matrix(const std::vector<FeatureSet>& users, const ExperimentConfig& cfg) {
  if (users.size() < 2) throw ConfigError("combined matrix needs at least two users");
  for (const FeatureSet& fs : users) check_splits(fs);
  const std::size_t n = users.size();
  MatrixReport report;
  report.kind = MatrixKind::Combined;
  for (const FeatureSet& fs : users) report.users.push_back(fs.user_id);
  report.cells.assign(n, std::vector<std::vector<RunRecord>>(n));

  for (std::size_t j = 0; j < n; ++j) {
    std::vector<const FeatureSet*> pool;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != j) pool.push_back(&users[u]);
    }
    ProjectedData p = project_pooled(pool, cfg.pca_components);
    p.data.test = project_split(users[j], Split::Test, p.pca);
    const RepeatSummary rs = repeat_runs(p.data, cfg.train, cfg.runs, cfg.jobs);
    for (std::size_t i = 0; i < n; ++i) {
      const LabeledData test = i == j ? p.data.test : project_split(users[i], Split::Test, p.pca);
      for (std::size_t r = 0; r < rs.runs.size(); ++r) {
        const RunResult& run = rs.runs[r];
        report.cells[i][j].push_back({r, run.seed, run.best_epoch, metrics(evaluate(run.best, test))});
      }
    }
  }
  return report;
}

ComparisonReport compare(const MatrixReport& cross_user, const MatrixReport& combined) {
  if (cross_user.users != combined.users) throw DimError("cross-user and combined reports cover different users");
  ComparisonReport out;
  out.users = cross_user.users;
  const std::size_t n = out.users.size();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& a = cross_user.cells.at(u).at(u);
    const auto& b = combined.cells.at(u).at(u);
    if (a.size() != b.size()) throw DimError("run counts differ for user " + out.users[u]);
    std::vector<Metrics> pa, pb;
    for (std::size_t r = 0; r < a.size(); ++r) {
      pa.push_back(a[r].test);
      pb.push_back(b[r].test);
    }
    out.personalized.push_back(std::move(pa));
    out.combined.push_back(std::move(pb));
  }
  for (std::size_t m = 0; m < 4; ++m) {
    std::vector<double> va, vb;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t r = 0; r < out.personalized[u].size(); ++r) {
        va.push_back(metric_value(out.personalized[u][r], static_cast<MetricId>(m)));
        vb.push_back(metric_value(out.combined[u][r], static_cast<MetricId>(m)));
      }
    }
    out.personalized_summary[m] = summarize(va);
    out.combined_summary[m] = summarize(vb);
    out.tests[m] = paired_ttest(va, vb);
  }
  return out;
}

std::vector<EncoderSpec> table1_encoders() {
  EncoderSpec rp_c{EncoderKind::RpContinuous};
  EncoderSpec rp_b{EncoderKind::RpBinary};
  EncoderSpec gasf{EncoderKind::Gasf};
  EncoderSpec gadf{EncoderKind::Gadf};
  EncoderSpec mtf4{EncoderKind::Mtf};
  mtf4.mtf_states = 4;
  EncoderSpec mtf128{EncoderKind::Mtf};
  mtf128.mtf_states = 128;
  return {rp_c, rp_b, gasf, gadf, mtf4, mtf128};
}

std::vector<EncoderRow> encoder_comparison(const MultimodalRecord& rec, const std::vector<EncoderSpec>& encoders,
                                           const FeaturizeOptions& base, const FeatureExtractor& ex,
                                           const ExperimentConfig& cfg) {
  std::vector<EncoderRow> rows;
  for (const EncoderSpec& spec : encoders) {
    FeaturizeOptions o = base;
    o.encoder = spec;
    const FeatureSet fs = featurize(rec, ex, o);
    check_splits(fs);
    const ProjectedData p = project_for_training(fs, cfg.pca_components);
    const RepeatSummary rs = repeat_runs(p.data, cfg.train, cfg.runs, cfg.jobs);
    EncoderRow row;
    row.name = spec.display_name();
    for (std::size_t r = 0; r < rs.runs.size(); ++r) {
      row.runs.push_back({r, rs.runs[r].seed, rs.runs[r].best_epoch, rs.runs[r].val});
    }
    row.val_accuracy = summarize(collect(row.runs, kAccuracy));
    rows.push_back(std::move(row));
  }
  rank(rows);
  return rows;
}

std::string format_pct(const Summary& s) { return fixed(s.mean * 100.0, 2) + " ± " + fixed(s.std * 100.0, 2) + "%"; }

std::string format_p(double p) { return p < 0.001 ? "< 0.001" : fixed(p, 4); }

std::string write_table1(const std::vector<EncoderRow>& rows, const std::filesystem::path& out_dir) {
  std::vector<std::vector<std::string>> t = {{"Encoding Method", "Validation Accuracy"}};
  std::string csv = "rank,encoding,val_accuracy_mean,val_accuracy_std,runs\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.push_back({rows[i].name, format_pct(rows[i].val_accuracy)});
    csv += std::to_string(i + 1) + "," + rows[i].name + "," + fixed(rows[i].val_accuracy.mean, 6) + "," +
           fixed(rows[i].val_accuracy.std, 6) + "," + std::to_string(rows[i].val_accuracy.n) + "\n";
  }
  const std::string text = "Encoding comparison (validation accuracy, mean ± std over runs)\n\n" + render_table(t);
  write_text(out_dir / "table1.txt", text);
  write_text(out_dir / "table1.csv", csv);
  return text;
}

std::string write_matrix_table(const MatrixReport& report, const std::filesystem::path& out_dir) {
  const bool cross = report.kind == MatrixKind::CrossUser;
  const std::string stem = cross ? "table2" : "table3";
  std::vector<std::vector<std::string>> t;
  std::vector<std::string> header = {"Tested on \\ Trained on"};
  for (std::size_t j = 0; j < report.size(); ++j) header.push_back(report.column_label(j));
  t.push_back(header);
  std::string csv = "tested,trained_column,training_users,accuracy_mean,accuracy_std,runs,diagonal\n";
  for (std::size_t i = 0; i < report.size(); ++i) {
    std::vector<std::string> row = {"User " + report.users[i]};
    for (std::size_t j = 0; j < report.size(); ++j) {
      const Summary s = report.accuracy(i, j);
      row.push_back(i == j ? "*" + format_pct(s) + "*" : format_pct(s));
      std::string training;
      for (std::size_t u = 0; u < report.size(); ++u) {
        if (cross ? u == j : u != j) training += (training.empty() ? "" : " ") + report.users[u];
      }
      csv += report.users[i] + "," + report.users[j] + "," + training + "," + fixed(s.mean, 6) + "," +
             fixed(s.std, 6) + "," + std::to_string(s.n) + "," + (i == j ? "1" : "0") + "\n";
    }
    t.push_back(row);
  }
  const std::string title = cross ? "Cross-user accuracy (rows: tested user; columns: training user; "
                                    "*diagonal* = personalized model)"
                                  : "Combined-user accuracy (rows: tested user; columns: training users; "
                                    "*diagonal* = leave-one-out, tested user unseen)";
  const std::string text = title + "\n\n" + render_table(t);
  write_text(out_dir / (stem + ".txt"), text);
  write_text(out_dir / (stem + ".csv"), csv);
  return text;
}

std::string write_table4(const ComparisonReport& report, const std::filesystem::path& out_dir) {
  std::vector<std::vector<std::string>> t = {{"Model Approach", "Accuracy", "Precision", "Recall", "F1-Score"}};
  std::vector<std::string> pers = {"Personalized"}, comb = {"Combined (General)"}, sig = {"Significance (p)"};
  std::string csv = "metric,personalized_mean,personalized_std,combined_mean,combined_std,t,df,p,degenerate\n";
  for (std::size_t m = 0; m < 4; ++m) {
    pers.push_back(format_pct(report.personalized_summary[m]));
    comb.push_back(format_pct(report.combined_summary[m]));
    const TTestResult& tt = report.tests[m];
    sig.push_back(format_p(tt.p) + (tt.degenerate ? " (degenerate)" : ""));
    csv += std::string(kMetricNames[m]) + "," + fixed(report.personalized_summary[m].mean, 6) + "," +
           fixed(report.personalized_summary[m].std, 6) + "," + fixed(report.combined_summary[m].mean, 6) + "," +
           fixed(report.combined_summary[m].std, 6) + "," + format_double(tt.t) + "," + format_double(tt.df) + "," +
           format_double(tt.p) + "," + (tt.degenerate ? "1" : "0") + "\n";
  }
  t.push_back(pers);
  t.push_back(comb);
  t.push_back(sig);
  const std::size_t pairs = report.personalized_summary[0].n;
  std::string text = "Overall performance: personalized vs combined (leave-one-out)\n\n" + render_table(t) + "\n";
  text += "Mean ± sample std over " + std::to_string(pairs) +
          " (user, run) values; precision, recall and F1 are macro-averaged over the four classes.\n";
  text += "Paired t-test on (user, run) pairs, df = " + fixed(report.tests[0].df, 0) +
          "; accuracy t = " + fixed(report.tests[0].t, 4) + ", p " +
          (report.tests[0].p < 0.001 ? "< 0.001" : "= " + fixed(report.tests[0].p, 4)) + ".\n";
  write_text(out_dir / "table4.txt", text);
  write_text(out_dir / "table4.csv", csv);
  return text;
}

void write_classwise_recall(const ComparisonReport& report, const std::filesystem::path& out_dir) {
  std::string csv = "user,approach,class,recall_mean,recall_std,runs\n";
  for (std::size_t u = 0; u < report.users.size(); ++u) {
    for (int which = 0; which < 2; ++which) {
      const auto& runs = which == 0 ? report.personalized[u] : report.combined[u];
      for (Awareness a : kAllClasses) {
        std::vector<double> v;
        for (const Metrics& m : runs) v.push_back(m.class_recall[index(a)]);
        const Summary s = summarize(v);
        csv += report.users[u] + "," + (which == 0 ? "personalized" : "combined") + "," + std::string(name(a)) +
               "," + fixed(s.mean, 6) + "," + fixed(s.std, 6) + "," + std::to_string(s.n) + "\n";
      }
    }
  }
  write_text(out_dir / "classwise_recall.csv", csv);
}

std::string runs_jsonl(const MatrixReport& report) {
  std::string out;
  for (std::size_t j = 0; j < report.size(); ++j) {
    for (std::size_t i = 0; i < report.size(); ++i) {
      for (const RunRecord& r : report.cells[i][j]) {
        json line;
        line["experiment"] = name(report.kind);
        line["users"] = report.users;
        line["trained_column"] = report.users[j];
        line["tested"] = report.users[i];
        line["run"] = r.run;
        line["seed"] = r.seed;
        line["best_epoch"] = r.best_epoch;
        line["test"] = metrics_json(r.test);
        out += line.dump() + "\n";
      }
    }
  }
  return out;
}

std::string runs_jsonl(const std::vector<EncoderRow>& rows) {
  std::string out;
  for (const EncoderRow& row : rows) {
    for (const RunRecord& r : row.runs) {
      json line;
      line["experiment"] = "encoders";
      line["encoder"] = row.name;
      line["run"] = r.run;
      line["seed"] = r.seed;
      line["best_epoch"] = r.best_epoch;
      line["val"] = metrics_json(r.test);
      out += line.dump() + "\n";
    }
  }
  return out;
}

RunLog parse_runs_jsonl(const std::string& text) {
  RunLog log;
  std::map<std::string, std::size_t> encoder_at;
  std::map<MatrixKind, std::size_t> matrix_at;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string experiment = j.at("experiment").get<std::string>();
      if (experiment == "train") continue;  // per-user training logs carry no table
      RunRecord rec;
      rec.run = j.at("run").get<std::size_t>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.best_epoch = j.at("best_epoch").get<std::size_t>();
      if (experiment == "encoders") {
        rec.test = metrics_from_json(j.at("val"));
        const std::string enc = j.at("encoder").get<std::string>();
        auto [it, fresh] = encoder_at.try_emplace(enc, log.encoders.size());
        if (fresh) log.encoders.push_back({enc, {}, {}});
        log.encoders[it->second].runs.push_back(rec);
        continue;
      }
      rec.test = metrics_from_json(j.at("test"));
      const MatrixKind kind = parse_matrix_kind(experiment);
      auto [it, fresh] = matrix_at.try_emplace(kind, log.matrices.size());
      if (fresh) {
        MatrixReport m;
        m.kind = kind;
        m.users = j.at("users").get<std::vector<std::string>>();
        m.cells.assign(m.users.size(), std::vector<std::vector<RunRecord>>(m.users.size()));
        log.matrices.push_back(std::move(m));
      }
      MatrixReport& m = log.matrices[it->second];
      auto pos = [&m](const std::string& id) {
        const auto f = std::find(m.users.begin(), m.users.end(), id);
        if (f == m.users.end()) throw ParseError("unknown user '" + id + "'");
        return static_cast<std::size_t>(f - m.users.begin());
      };
      m.cells[pos(j.at("tested").get<std::string>())][pos(j.at("trained_column").get<std::string>())].push_back(rec);
    } catch (const json::exception& e) {
      throw ParseError("runs.jsonl line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("runs.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (EncoderRow& row : log.encoders) row.val_accuracy = summarize(collect(row.runs, kAccuracy));
  rank(log.encoders);
  return log;
}

std::string emit_reports(const RunLog& log, const std::filesystem::path& out_dir) {
  std::string text;
  if (!log.encoders.empty()) text += write_table1(log.encoders, out_dir) + "\n";
  const MatrixReport* cross = nullptr;
  const MatrixReport* comb = nullptr;
  for (const MatrixReport& m : log.matrices) {
    text += write_matrix_table(m, out_dir) + "\n";
    (m.kind == MatrixKind::CrossUser ? cross : comb) = &m;
  }
  if (cross && comb) {
    const ComparisonReport c = compare(*cross, *comb);
    text += write_table4(c, out_dir) + "\n";
    write_classwise_recall(c, out_dir);
  }
  return text;
}

}  // namespace physio
