#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "physio/dataset.hpp"
#include "physio/evaluation.hpp"
#include "physio/synthgen.hpp"

namespace physio {

enum class ValueKind { Text, Integer, Real, Choice };

struct ConfigKey {
  std::string key;
  std::string default_value;
  ValueKind kind = ValueKind::Text;
  std::vector<std::string> choices;  ///< Choice only
  std::string help;
};

/// Every recognised key, in snapshot order.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value configuration. Unknown keys and malformed values throw
/// ConfigError naming the key.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  /// Applies every line of a key=value file.
  void load(const std::filesystem::path& file);
  void load_text(const std::string& text, const std::string& origin);

  const std::string& get(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;  ///< non-negative integer

  /// All keys in registry order, one `key=value` line each.
  std::string snapshot() const;
  void write_snapshot(const std::filesystem::path& file) const;

  // Typed views. Each validates and throws ConfigError on bad values.
  WindowSpec window_spec() const;
  EncoderSpec encoder_spec() const;
  SplitFractions split_fractions() const;
  SplitMode split_mode() const;
  BuildOptions build_options() const;
  FeaturizeOptions featurize_options() const;
  TrainConfig train_config() const;
  ExperimentConfig experiment_config() const;
  SynthOptions synth_options() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace physio
