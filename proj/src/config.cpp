#include "physio/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "physio/errors.hpp"
#include "physio/kv.hpp"

namespace physio {

namespace {

using K = ValueKind;

std::vector<ConfigKey> make_keys() {
  return {
      // run
      {"seed", "0", K::Integer, {}, "base seed for splits, training, synthesis"},
      {"out", "out", K::Text, {}, "output directory"},
      {"jobs", "1", K::Integer, {}, "worker threads for parallel stages"},
      // inputs
      {"sessions", "data", K::Text, {}, "directory of session directories"},
      {"session", "", K::Text, {}, "single session directory (encoders; default: first under sessions)"},
      {"datasets", "", K::Text, {}, "directory of encoded datasets (features input)"},
      {"features", "", K::Text, {}, "directory of .pfea feature files; empty = featurize sessions in memory"},
      {"runs_file", "", K::Text, {}, "runs.jsonl to rebuild reports from (report)"},
      {"user", "1", K::Text, {}, "user id (train)"},
      // synthesis
      {"users", "4", K::Integer, {}, "synthetic cohort size"},
      {"divergence", "1", K::Real, {}, "0 = identical users, 1 = permuted state responses"},
      {"scale", "0.5", K::Real, {}, "fraction of the reference per-user window counts"},
      {"noise_scale", "1", K::Real, {}, "multiplier on the synthetic noise sd"},
      {"preset", "cohort", K::Choice, {"cohort", "distance"}, "synthetic preset"},
      // windows
      {"window_s", "30", K::Real, {}, "window length in seconds"},
      {"step_s", "3", K::Real, {}, "window step in seconds"},
      {"fs", "4", K::Real, {}, "common resampling rate in Hz"},
      {"epsilon_mix", "0.5", K::Real, {}, "global weight in combined scaling"},
      {"clip_lo_pct", "5", K::Real, {}, "lower clipping percentile"},
      {"clip_hi_pct", "95", K::Real, {}, "upper clipping percentile"},
      {"scaling_mode", "combined", K::Choice, {"global", "local", "combined"}, "window scaling"},
      // encoding
      {"encoder", "rp-continuous", K::Choice, {"rp-continuous", "rp-binary", "gasf", "gadf", "mtf"}, "image encoder"},
      {"rp_threshold", "0.5", K::Real, {}, "binary RP threshold on the [0,1] scale"},
      {"mtf_states", "4", K::Integer, {}, "MTF quantile bins"},
      {"image_format", "png", K::Choice, {"png", "jpeg"}, "dataset image format"},
      {"jpeg_quality", "95", K::Integer, {}, "JPEG quality 1..100"},
      // split
      {"split_mode", "per-window", K::Choice, {"per-window", "block-contiguous"}, "split unit"},
      {"split_train", "0.7", K::Real, {}, "train fraction"},
      {"split_val", "0.15", K::Real, {}, "validation fraction"},
      {"split_test", "0.15", K::Real, {}, "test fraction"},
      // embedding
      {"extractor", "builtin", K::Choice, {"builtin", "external"}, "feature extractor"},
      {"extractor_seed", "2048", K::Integer, {}, "seed of the builtin projection"},
      {"embeddings", "", K::Text, {}, "PEMB1 sidecar for the external extractor"},
      {"pca_components", "100", K::Integer, {}, "PCA output dimension"},
      // training
      {"lr", "0.001", K::Real, {}, "Adam learning rate"},
      {"weight_decay", "0.0001", K::Real, {}, "coupled L2 coefficient"},
      {"max_epochs", "25", K::Integer, {}, "training epochs"},
      {"batch_size", "32", K::Integer, {}, "mini-batch size"},
      {"runs", "5", K::Integer, {}, "repetitions per configuration"},
  };
}

const ConfigKey& lookup(const std::string& key) {
  const auto& keys = config_keys();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.key == key; });
  if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

void check_value(const ConfigKey& k, const std::string& v) {
  switch (k.kind) {
    case K::Text: return;
    case K::Integer: {
      std::uint64_t x = 0;
      if (!parse_number(v, x)) throw ConfigError("key '" + k.key + "': '" + v + "' is not a non-negative integer");
      return;
    }
    case K::Real: {
      double x = 0.0;
      if (!parse_number(v, x) || !std::isfinite(x)) throw ConfigError("key '" + k.key + "': '" + v + "' is not a number");
      return;
    }
    case K::Choice:
      if (std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) {
        std::string all;
        for (const auto& c : k.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError("key '" + k.key + "': '" + v + "' is not one of " + all);
      }
      return;
  }
}

// Re-labels spec errors from domain validators as config errors.
template <class Fn>
auto as_config(Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

RunConfig::RunConfig() {
  for (const ConfigKey& k : config_keys()) values_[k.key] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey& k = lookup(key);
  check_value(k, value);
  values_[key] = value;
}

void RunConfig::load(const std::filesystem::path& file) {
  std::string text;
  try {
    text = read_text(file);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  load_text(text, file.string());
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  KeyValues kv;
  try {
    kv = parse_kv(text, origin);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [k, v] : kv) set(k, v);
}

const std::string& RunConfig::get(const std::string& key) const {
  lookup(key);
  return values_.at(key);
}

double RunConfig::real(const std::string& key) const {
  double x = 0.0;
  if (!parse_number(get(key), x)) throw ConfigError("key '" + key + "' is not a number");
  return x;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  std::int64_t x = 0;
  if (!parse_number(get(key), x)) throw ConfigError("key '" + key + "' is not an integer");
  return x;
}

std::uint64_t RunConfig::count(const std::string& key) const {
  std::uint64_t x = 0;
  if (!parse_number(get(key), x)) throw ConfigError("key '" + key + "' must be a non-negative integer");
  return x;
}

std::string RunConfig::snapshot() const {
  KeyValues kv;
  for (const ConfigKey& k : config_keys()) kv.emplace_back(k.key, values_.at(k.key));
  return "# " + std::string(kToolVersion) + " resolved configuration\n" + render_kv(kv);
}

void RunConfig::write_snapshot(const std::filesystem::path& file) const { write_text(file, snapshot()); }

WindowSpec RunConfig::window_spec() const {
  return as_config([&] {
    WindowSpec w;
    w.window_s = real("window_s");
    w.step_s = real("step_s");
    w.fs = real("fs");
    w.epsilon_mix = real("epsilon_mix");
    w.clip_lo_pct = real("clip_lo_pct");
    w.clip_hi_pct = real("clip_hi_pct");
    w.scaling_mode = parse_scaling_mode(get("scaling_mode"));
    w.validate();
    return w;
  });
}

EncoderSpec RunConfig::encoder_spec() const {
  return as_config([&] {
    EncoderSpec e;
    e.kind = parse_encoder_kind(get("encoder"));
    e.rp_threshold = real("rp_threshold");
    e.mtf_states = count("mtf_states");
    e.validate();
    return e;
  });
}

SplitFractions RunConfig::split_fractions() const {
  SplitFractions f{real("split_train"), real("split_val"), real("split_test")};
  if (f.train <= 0.0 || f.val < 0.0 || f.test < 0.0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative with a positive train share and sum to 1");
  }
  return f;
}

SplitMode RunConfig::split_mode() const {
  return as_config([&] { return parse_split_mode(get("split_mode")); });
}

BuildOptions RunConfig::build_options() const {
  BuildOptions b;
  b.format = get("image_format") == "jpeg" ? ImageFormat::Jpeg : ImageFormat::Png;
  const std::int64_t q = integer("jpeg_quality");
  if (q < 1 || q > 100) throw ConfigError("jpeg_quality must be in 1..100");
  b.jpeg_quality = static_cast<int>(q);
  b.jobs = std::max<std::uint64_t>(1, count("jobs"));
  return b;
}

FeaturizeOptions RunConfig::featurize_options() const {
  FeaturizeOptions o;
  o.window = window_spec();
  o.encoder = encoder_spec();
  o.split_seed = count("seed");
  o.fractions = split_fractions();
  o.split_mode = split_mode();
  o.jobs = std::max<std::uint64_t>(1, count("jobs"));
  return o;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lr = real("lr");
  t.weight_decay = real("weight_decay");
  t.max_epochs = count("max_epochs");
  t.batch_size = count("batch_size");
  t.seed = count("seed");
  t.validate();
  return t;
}

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig e;
  e.train = train_config();
  e.runs = count("runs");
  if (e.runs < 1) throw ConfigError("runs must be at least 1");
  e.pca_components = count("pca_components");
  if (e.pca_components < 1) throw ConfigError("pca_components must be at least 1");
  e.jobs = std::max<std::uint64_t>(1, count("jobs"));
  return e;
}

SynthOptions RunConfig::synth_options() const {
  SynthOptions s;
  s.users = count("users");
  if (s.users < 1) throw ConfigError("users must be at least 1");
  s.divergence = real("divergence");
  if (s.divergence < 0.0 || s.divergence > 1.0) throw ConfigError("divergence must lie in [0, 1]");
  s.scale = real("scale");
  if (!(s.scale > 0.0)) throw ConfigError("scale must be positive");
  s.noise_scale = real("noise_scale");
  if (s.noise_scale < 0.0) throw ConfigError("noise_scale must be non-negative");
  s.seed = count("seed");
  s.distance_structured = get("preset") == "distance";
  return s;
}

}  // namespace physio
