#include "physio/signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "physio/errors.hpp"
#include "physio/kv.hpp"

namespace physio {

namespace {

constexpr double kTimeEps = 1e-9;

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_double(std::string_view s, const std::filesystem::path& file, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(file.string() + ":" + std::to_string(line) + ": bad number '" +
                     std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

struct CsvColumns {
  std::vector<double> t;
  std::vector<std::string> value;
};

CsvColumns read_two_column_csv(const std::filesystem::path& file, std::string_view expected_header) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  CsvColumns cols;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim(line);
    if (lineno == 1) {
      if (row != expected_header) {
        throw ParseError(file.string() + ": expected header '" + std::string(expected_header) + "'");
      }
      continue;
    }
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(file.string() + ":" + std::to_string(lineno) + ": missing comma");
    }
    cols.t.push_back(parse_double(trim(row.substr(0, comma)), file, lineno));
    cols.value.emplace_back(trim(row.substr(comma + 1)));
  }
  return cols;
}

double inferred_rate(const std::vector<double>& t) {
  if (t.size() < 2) return 0.0;
  return static_cast<double>(t.size() - 1) / (t.back() - t.front());
}

}  // namespace

std::string_view name(ScalingMode m) {
  switch (m) {
    case ScalingMode::Global: return "global";
    case ScalingMode::Local: return "local";
    case ScalingMode::Combined: return "combined";
  }
  return "combined";
}

ScalingMode parse_scaling_mode(std::string_view s) {
  if (s == "global") return ScalingMode::Global;
  if (s == "local") return ScalingMode::Local;
  if (s == "combined") return ScalingMode::Combined;
  throw ParseError("unknown scaling mode '" + std::string(s) + "'");
}

std::size_t WindowSpec::side() const {
  const double n = window_s * fs;
  const double r = std::round(n);
  if (!(n > 0.5) || std::abs(n - r) > 1e-9) {
    throw InvalidSpec("window_s * fs must be a positive integer (got " + std::to_string(n) + ")");
  }
  return static_cast<std::size_t>(r);
}

void WindowSpec::validate() const {
  if (!(fs > 0.0)) throw InvalidSpec("fs must be positive");
  side();
  if (!(step_s > 0.0) || step_s > window_s) throw InvalidSpec("need 0 < step_s <= window_s");
  if (!(clip_lo_pct < clip_hi_pct) || clip_lo_pct < 0.0 || clip_hi_pct > 100.0) {
    throw InvalidSpec("need 0 <= clip_lo_pct < clip_hi_pct <= 100");
  }
  if (!(epsilon_mix >= 0.0 && epsilon_mix <= 1.0)) throw InvalidSpec("epsilon_mix must be in [0,1]");
}

double csv_round(double v) {
  const std::string s = format_fixed6(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

MultimodalRecord load_session(const std::filesystem::path& dir, SessionFormat /*format*/) {
  MultimodalRecord rec;
  rec.user_id = dir.filename().string();
  if (rec.user_id.empty()) rec.user_id = dir.parent_path().filename().string();
  rec.session_id = "0";

  for (Channel c : kAllChannels) {
    const auto file = dir / (std::string(file_name(c)) + ".csv");
    if (!std::filesystem::exists(file)) throw MissingChannel(c);
    const CsvColumns cols = read_two_column_csv(file, "t,value");
    if (cols.t.empty()) throw EmptySignal("no samples in " + file.string());

    Signal s;
    s.channel = c;
    s.t0 = cols.t.front();
    s.fs = native_rate(c);
    s.values.reserve(cols.value.size());
    for (std::size_t i = 0; i < cols.value.size(); ++i) {
      double v = 0.0;
      const auto& text = cols.value[i];
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw CorruptSample(c, i);
      }
      s.values.push_back(v);
    }
    const double found = inferred_rate(cols.t);
    if (found > 0.0 && std::abs(found - s.fs) > 1e-3 * s.fs) throw RateMismatch(c, found);
    rec[c] = std::move(s);
  }

  const auto label_file = dir / "labels.csv";
  if (!std::filesystem::exists(label_file)) throw IoError("missing " + label_file.string());
  const CsvColumns labels = read_two_column_csv(label_file, "t,label");
  if (labels.t.empty()) throw EmptySignal("no labels in " + label_file.string());
  rec.label_t0 = labels.t.front();
  rec.label_fs = labels.t.size() >= 2 ? std::round(inferred_rate(labels.t) * 1e6) / 1e6 : 1.0;
  rec.labels.reserve(labels.value.size());
  for (const auto& v : labels.value) rec.labels.push_back(parse_awareness(v));

  const auto meta_file = dir / "session.meta";
  if (std::filesystem::exists(meta_file)) {
    for (const auto& [key, value] : read_kv(meta_file)) {
      if (key == "user_id") rec.user_id = value;
      if (key == "session_id") rec.session_id = value;
    }
  }
  return rec;
}

void write_session(const MultimodalRecord& rec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  for (Channel c : kAllChannels) {
    const Signal& s = rec[c];
    std::string body = "t,value\n";
    body.reserve(s.values.size() * 24);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      body += format_fixed6(s.t0 + static_cast<double>(k) / s.fs);
      body += ',';
      body += format_fixed6(s.values[k]);
      body += '\n';
    }
    write_text(dir / (std::string(file_name(c)) + ".csv"), body);
  }

  std::string labels = "t,label\n";
  for (std::size_t k = 0; k < rec.labels.size(); ++k) {
    labels += format_fixed6(rec.label_t0 + static_cast<double>(k) / rec.label_fs);
    labels += ',';
    labels += name(rec.labels[k]);
    labels += '\n';
  }
  write_text(dir / "labels.csv", labels);
  write_text(dir / "session.meta", "user_id=" + rec.user_id + "\nsession_id=" + rec.session_id + "\n");
}

Signal resample(const Signal& s, double target_fs, std::size_t count, double start) {
  if (s.values.empty()) throw EmptySignal("cannot resample an empty signal");
  if (!(target_fs > 0.0)) throw InvalidSpec("target_fs must be positive");
  Signal out;
  out.channel = s.channel;
  out.t0 = start;
  out.fs = target_fs;
  out.values.resize(count);
  const std::size_t last = s.values.size() - 1;
  const double ratio = s.fs / target_fs;
  const double offset = (start - s.t0) * s.fs;
  for (std::size_t k = 0; k < count; ++k) {
    // Position in native sample units.
    const double u = offset + static_cast<double>(k) * ratio;
    if (u <= 0.0) {
      out.values[k] = s.values.front();
    } else if (u >= static_cast<double>(last)) {
      out.values[k] = s.values[last];
    } else {
      const double base = std::floor(u);
      const auto i = static_cast<std::size_t>(base);
      const double frac = u - base;
      out.values[k] = frac == 0.0 ? s.values[i] : s.values[i] + frac * (s.values[i + 1] - s.values[i]);
    }
  }
  return out;
}

Signal resample(const Signal& s, double target_fs) {
  if (s.values.empty()) throw EmptySignal("cannot resample an empty signal");
  if (!(target_fs > 0.0)) throw InvalidSpec("target_fs must be positive");
  const double span = static_cast<double>(s.values.size() - 1) / s.fs;
  const auto count = static_cast<std::size_t>(std::floor(span * target_fs + kTimeEps)) + 1;
  return resample(s, target_fs, count, s.t0);
}

MultimodalRecord synchronize(const MultimodalRecord& rec, double fs) {
  double start = -INFINITY;
  double end = INFINITY;
  for (const Signal& s : rec.channels) {
    if (s.values.empty()) throw EmptySignal("empty channel " + std::string(file_name(s.channel)));
    start = std::max(start, s.t0);
    end = std::min(end, s.end_time());
  }
  const double span = std::max(0.0, end - start);
  const auto count = static_cast<std::size_t>(std::floor(span * fs + kTimeEps));

  MultimodalRecord out;
  out.user_id = rec.user_id;
  out.session_id = rec.session_id;
  out.label_fs = fs;
  out.label_t0 = start;
  for (Channel c : kAllChannels) out[c] = resample(rec[c], fs, count, start);

  out.labels.resize(count, Awareness::LL);
  if (!rec.labels.empty()) {
    const std::size_t last = rec.labels.size() - 1;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = start + static_cast<double>(k) / fs;
      const double u = (t - rec.label_t0) * rec.label_fs + kTimeEps;
      const std::size_t i = u <= 0.0 ? 0 : std::min(last, static_cast<std::size_t>(std::floor(u)));
      out.labels[k] = rec.labels[i];
    }
  }
  return out;
}

double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw EmptySignal("percentile of empty sequence");
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const double base = std::floor(pos);
  const auto i = static_cast<std::size_t>(base);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - base;
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

ClipResult clip(const Signal& s, double lo_pct, double hi_pct) {
  if (s.values.empty()) throw EmptySignal("cannot clip an empty signal");
  if (!(lo_pct < hi_pct)) throw InvalidBounds("clip percentiles need lo < hi");
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  ClipResult r;
  r.bounds.lo = percentile_sorted(sorted, lo_pct);
  r.bounds.hi = percentile_sorted(sorted, hi_pct);
  r.signal = s;
  for (double& v : r.signal.values) v = std::clamp(v, r.bounds.lo, r.bounds.hi);
  return r;
}

std::vector<double> scale_window(std::span<const double> w, double global_min, double global_max,
                                 ScalingMode mode, double epsilon_mix) {
  auto minmax = [](std::span<const double> x, double lo, double hi) {
    std::vector<double> out(x.size(), 0.0);
    const double range = hi - lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp((x[i] - lo) / range, 0.0, 1.0);
    return out;
  };
  double local_min = 0.0, local_max = 0.0;
  if (!w.empty()) {
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    local_min = *lo;
    local_max = *hi;
  }
  switch (mode) {
    case ScalingMode::Global: return minmax(w, global_min, global_max);
    case ScalingMode::Local: return minmax(w, local_min, local_max);
    case ScalingMode::Combined: {
      const auto g = minmax(w, global_min, global_max);
      const auto l = minmax(w, local_min, local_max);
      std::vector<double> out(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = std::clamp(epsilon_mix * g[i] + (1.0 - epsilon_mix) * l[i], 0.0, 1.0);
      }
      return out;
    }
  }
  return {};
}

std::size_t window_count(double duration_s, double window_s, double step_s) {
  if (duration_s + kTimeEps < window_s) return 0;
  return static_cast<std::size_t>(std::floor((duration_s - window_s) / step_s + kTimeEps)) + 1;
}

Awareness majority_label(std::span<const Awareness> labels) {
  std::array<std::size_t, kNumClasses> counts{};
  for (Awareness a : labels) ++counts[index(a)];
  // max_element returns the first maximum, i.e. the lowest-awareness class on ties.
  const auto best = std::max_element(counts.begin(), counts.end());
  return static_cast<Awareness>(best - counts.begin());
}

std::vector<WindowGroup> windows(const MultimodalRecord& rec, const WindowSpec& spec) {
  spec.validate();
  const std::size_t n = spec.side();
  const std::size_t total = rec.channels[0].values.size();
  for (const Signal& s : rec.channels) {
    if (std::abs(s.fs - spec.fs) > 1e-9 || s.values.size() != total) {
      throw InvalidSpec("record is not synchronized at " + std::to_string(spec.fs) + " Hz");
    }
  }
  if (rec.labels.size() != total) throw InvalidSpec("label track length differs from signal length");

  const double duration = static_cast<double>(total) / spec.fs;
  const std::size_t count = window_count(duration, spec.window_s, spec.step_s);
  if (count == 0) return {};

  std::array<ClipResult, kNumChannels> clipped;
  for (Channel c : kAllChannels) clipped[index(c)] = clip(rec[c], spec.clip_lo_pct, spec.clip_hi_pct);

  const double t0 = rec.channels[0].t0;
  std::vector<WindowGroup> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double rel_start = static_cast<double>(k) * spec.step_s;
    const auto first = static_cast<std::size_t>(std::floor(rel_start * spec.fs + kTimeEps));
    WindowGroup& g = out[k];
    g.ordinal = k;
    g.start_s = t0 + rel_start;
    g.label = majority_label(std::span(rec.labels).subspan(first, n));
    for (Channel c : kAllChannels) {
      const ClipResult& cr = clipped[index(c)];
      ScaledWindow& w = g.channels[index(c)];
      w.channel = c;
      w.start_s = g.start_s;
      w.label = g.label;
      w.values = scale_window(std::span(cr.signal.values).subspan(first, n), cr.bounds.lo,
                              cr.bounds.hi, spec.scaling_mode, spec.epsilon_mix);
    }
  }
  return out;
}

}  // namespace physio
