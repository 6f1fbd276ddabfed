#include "physio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "physio/errors.hpp"
#include "physio/kv.hpp"
#include "physio/parallel.hpp"
#include "physio/rng.hpp"

namespace physio {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view name(SplitMode m) {
  return m == SplitMode::PerWindow ? "per-window" : "block-contiguous";
}

SplitMode parse_split_mode(std::string_view s) {
  if (s == "per-window") return SplitMode::PerWindow;
  if (s == "block-contiguous") return SplitMode::BlockContiguous;
  throw ParseError("unknown split mode '" + std::string(s) + "'");
}

SplitCounts split_counts(std::size_t n, const SplitFractions& f) {
  if (!(f.train > 0 && f.val > 0 && f.test > 0) || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw InvalidSpec("split fractions must be positive and sum to 1");
  }
  const double dn = static_cast<double>(n);
  SplitCounts c;
  c.train = static_cast<std::size_t>(std::floor(dn * f.train + 1e-9));
  c.val = static_cast<std::size_t>(std::floor(dn * f.val + 1e-9));
  c.test = n - c.train - c.val;
  return c;
}

std::size_t block_length(const WindowSpec& spec) {
  return static_cast<std::size_t>(std::ceil(spec.window_s / spec.step_s - 1e-9));
}

std::vector<Split> assign_split(std::size_t n, std::uint64_t seed, const SplitFractions& f,
                                SplitMode mode, std::size_t block_len) {
  const SplitCounts counts = split_counts(n, f);
  std::vector<std::size_t> order;
  order.reserve(n);
  Rng rng(seed);
  if (mode == SplitMode::PerWindow) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
  } else {
    block_len = std::max<std::size_t>(1, block_len);
    std::vector<std::size_t> blocks((n + block_len - 1) / block_len);
    std::iota(blocks.begin(), blocks.end(), 0);
    rng.shuffle(std::span(blocks));
    for (std::size_t b : blocks) {
      for (std::size_t i = b * block_len; i < std::min(n, (b + 1) * block_len); ++i) order.push_back(i);
    }
  }
  std::vector<Split> out(n, Split::Test);
  for (std::size_t r = 0; r < n; ++r) {
    if (r < counts.train) {
      out[order[r]] = Split::Train;
    } else if (r < counts.train + counts.val) {
      out[order[r]] = Split::Val;
    }
  }
  return out;
}

std::string stem_for(std::size_t window_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", window_id);
  return buf;
}

std::string ManifestEntry::stem() const { return stem_for(window_id); }

namespace {

KeyValues meta_of(const DatasetManifest& m) {
  const WindowSpec& w = m.window_spec;
  const EncoderSpec& e = m.encoder_spec;
  return {
      {"tool_version", std::string(kToolVersion)},
      {"user_id", m.user_id},
      {"session_id", m.session_id},
      {"windows", std::to_string(m.entries.size())},
      {"seed", std::to_string(m.seed)},
      {"split_mode", std::string(name(m.split_mode))},
      {"split_train", format_double(m.fractions.train)},
      {"split_val", format_double(m.fractions.val)},
      {"split_test", format_double(m.fractions.test)},
      {"window_s", format_double(w.window_s)},
      {"step_s", format_double(w.step_s)},
      {"fs", format_double(w.fs)},
      {"epsilon_mix", format_double(w.epsilon_mix)},
      {"clip_lo_pct", format_double(w.clip_lo_pct)},
      {"clip_hi_pct", format_double(w.clip_hi_pct)},
      {"scaling_mode", std::string(name(w.scaling_mode))},
      {"encoder", std::string(name(e.kind))},
      {"rp_threshold", format_double(e.rp_threshold)},
      {"mtf_states", std::to_string(e.mtf_states)},
      {"image_format", m.image_format == ImageFormat::Png ? "png" : "jpeg"},
      {"jpeg_quality", std::to_string(m.jpeg_quality)},
  };
}

double to_double(const std::string& s) { return std::stod(s); }

}  // namespace

std::string manifest_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const ManifestEntry& e : manifest.entries) {
    ojson j;
    j["session_id"] = e.session_id;
    j["window_id"] = e.window_id;
    j["label"] = std::string(name(e.label));
    j["start_s"] = e.start_s;
    j["split"] = std::string(name(e.split));
    ojson paths = ojson::object();
    for (Channel c : kAllChannels) paths[std::string(folder_name(c))] = e.paths[index(c)];
    j["paths"] = std::move(paths);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest) {
  write_text(manifest.root / "manifest.jsonl", manifest_jsonl(manifest));
  write_text(manifest.root / "dataset.meta", render_kv(meta_of(manifest)));
}

DatasetManifest load_manifest(const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  for (const auto& [key, value] : read_kv(root / "dataset.meta")) {
    if (key == "user_id") m.user_id = value;
    else if (key == "session_id") m.session_id = value;
    else if (key == "seed") m.seed = std::stoull(value);
    else if (key == "split_mode") m.split_mode = parse_split_mode(value);
    else if (key == "split_train") m.fractions.train = to_double(value);
    else if (key == "split_val") m.fractions.val = to_double(value);
    else if (key == "split_test") m.fractions.test = to_double(value);
    else if (key == "window_s") m.window_spec.window_s = to_double(value);
    else if (key == "step_s") m.window_spec.step_s = to_double(value);
    else if (key == "fs") m.window_spec.fs = to_double(value);
    else if (key == "epsilon_mix") m.window_spec.epsilon_mix = to_double(value);
    else if (key == "clip_lo_pct") m.window_spec.clip_lo_pct = to_double(value);
    else if (key == "clip_hi_pct") m.window_spec.clip_hi_pct = to_double(value);
    else if (key == "scaling_mode") m.window_spec.scaling_mode = parse_scaling_mode(value);
    else if (key == "encoder") m.encoder_spec.kind = parse_encoder_kind(value);
    else if (key == "rp_threshold") m.encoder_spec.rp_threshold = to_double(value);
    else if (key == "mtf_states") m.encoder_spec.mtf_states = std::stoul(value);
    else if (key == "image_format") m.image_format = value == "jpeg" ? ImageFormat::Jpeg : ImageFormat::Png;
    else if (key == "jpeg_quality") m.jpeg_quality = std::stoi(value);
  }

  std::istringstream in(read_text(root / "manifest.jsonl"));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = ojson::parse(line);
      ManifestEntry e;
      e.session_id = j.at("session_id").get<std::string>();
      e.window_id = j.at("window_id").get<std::size_t>();
      e.label = parse_awareness(j.at("label").get<std::string>());
      e.start_s = j.at("start_s").get<double>();
      e.split = parse_split(j.at("split").get<std::string>());
      const auto& paths = j.at("paths");
      for (Channel c : kAllChannels) e.paths[index(c)] = paths.at(std::string(folder_name(c))).get<std::string>();
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError((root / "manifest.jsonl").string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return m;
}

DatasetManifest build(const MultimodalRecord& rec, const WindowSpec& wspec, const EncoderSpec& espec,
                      const fs::path& out_dir, const BuildOptions& options) {
  wspec.validate();
  espec.validate();
  const auto groups = windows(synchronize(rec, wspec.fs), wspec);

  for (Awareness a : kAllClasses) {
    for (Channel c : kAllChannels) {
      std::error_code ec;
      fs::create_directories(out_dir / std::string(name(a)) / std::string(folder_name(c)), ec);
      if (ec) throw IoError("cannot create dataset folders under " + out_dir.string() + ": " + ec.message());
    }
  }

  DatasetManifest m;
  m.root = out_dir;
  m.user_id = rec.user_id;
  m.session_id = rec.session_id;
  m.window_spec = wspec;
  m.encoder_spec = espec;
  m.image_format = options.format;
  m.jpeg_quality = options.jpeg_quality;
  m.entries.resize(groups.size());

  const std::string ext(extension(options.format));
  parallel_for(groups.size(), options.jobs, [&](std::size_t k) {
    const WindowGroup& g = groups[k];
    ManifestEntry& e = m.entries[k];
    e.session_id = rec.session_id;
    e.window_id = g.ordinal + 1;
    e.label = g.label;
    e.start_s = g.start_s;
    for (Channel c : kAllChannels) {
      const std::string rel = std::string(name(g.label)) + "/" + std::string(folder_name(c)) + "/" +
                              stem_for(e.window_id) + ext;
      e.paths[index(c)] = rel;
      const Image8 img = to_image(encode(g.channels[index(c)].values, espec));
      try {
        if (options.format == ImageFormat::Png) {
          write_png(img, out_dir / rel);
        } else {
          write_jpeg(img, out_dir / rel, options.jpeg_quality);
        }
      } catch (const IoError& ex) {
        throw IoError("session " + rec.session_id + " window " + stem_for(e.window_id) + ": " + ex.what());
      }
    }
  });
  save_manifest(m);
  return m;
}

DatasetManifest split(DatasetManifest manifest, std::uint64_t seed, const SplitFractions& f, SplitMode mode) {
  if (manifest.entries.empty()) throw EmptyDataset("cannot split an empty manifest");
  std::vector<std::size_t> order(manifest.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = manifest.entries[a];
    const auto& eb = manifest.entries[b];
    return std::tie(ea.session_id, ea.window_id) < std::tie(eb.session_id, eb.window_id);
  });
  const auto assignment = assign_split(order.size(), seed, f, mode, block_length(manifest.window_spec));
  for (std::size_t r = 0; r < order.size(); ++r) manifest.entries[order[r]].split = assignment[r];
  manifest.seed = seed;
  manifest.fractions = f;
  manifest.split_mode = mode;
  return manifest;
}

DatasetReader::DatasetReader(DatasetManifest manifest) : manifest_(std::move(manifest)) {
  order_.resize(manifest_.entries.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = manifest_.entries[a];
    const auto& eb = manifest_.entries[b];
    return std::tie(ea.session_id, ea.window_id) < std::tie(eb.session_id, eb.window_id);
  });
}

DatasetSample DatasetReader::read(std::size_t i) const {
  const ManifestEntry& e = manifest_.entries[order_.at(i)];
  DatasetSample s;
  s.session_id = e.session_id;
  s.window_id = e.window_id;
  s.label = e.label;
  s.split = e.split;
  s.start_s = e.start_s;
  for (Channel c : kAllChannels) {
    const fs::path file = manifest_.root / e.paths[index(c)];
    if (!fs::exists(file)) throw ManifestInconsistent(e.stem(), c, file.string());
    s.images[index(c)] = from_image(read_image(file));
  }
  return s;
}

std::optional<DatasetSample> DatasetReader::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  return read(cursor_++);
}

std::vector<DatasetSample> load(const DatasetManifest& manifest) {
  DatasetReader reader(manifest);
  std::vector<DatasetSample> out;
  out.reserve(reader.size());
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace physio
