#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "physio/errors.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

struct Subcommand {
  const char* name;
  const char* help;
  void (*run)(const physio::RunConfig&);
};

constexpr Subcommand kSubcommands[] = {
    {"synth", "generate synthetic sessions", physio::cli::cmd_synth},
    {"encode", "sessions -> image datasets with manifest and split", physio::cli::cmd_encode},
    {"features", "image datasets -> embedding files", physio::cli::cmd_features},
    {"train", "personalized model for one user", physio::cli::cmd_train},
    {"xmatrix", "cross-user accuracy matrix", physio::cli::cmd_xmatrix},
    {"combined", "combined-user leave-one-out matrix", physio::cli::cmd_combined},
    {"compare", "both matrices plus the personalized vs combined comparison", physio::cli::cmd_compare},
    {"report", "rebuild report tables from runs.jsonl", physio::cli::cmd_report},
    {"encoders", "encoder comparison on one session", physio::cli::cmd_encoders},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physio: wearable signals -> images -> embeddings -> awareness classifier"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  std::string config_file;
  app.add_option("--config", config_file, "key=value config file; flags override it");

  std::map<std::string, std::string> given;
  for (const physio::ConfigKey& k : physio::config_keys()) {
    std::string help = k.help + " [" + k.key + ", default: " + (k.default_value.empty() ? "\"\"" : k.default_value);
    if (!k.choices.empty()) {
      help += "; one of";
      for (const auto& c : k.choices) help += " " + c;
    }
    help += "]";
    app.add_option_function<std::string>(
           flag_name(k.key), [&given, key = k.key](const std::string& v) { given[key] = v; }, help)
        ->type_name("VALUE");
  }

  std::map<std::string, CLI::App*> subs;
  for (const Subcommand& s : kSubcommands) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    subs[s.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  physio::RunConfig cfg;
  try {
    if (!config_file.empty()) cfg.load(config_file);
    for (const auto& [k, v] : given) cfg.set(k, v);
  } catch (const physio::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  for (const Subcommand& s : kSubcommands) {
    if (!subs[s.name]->parsed()) continue;
    try {
      s.run(cfg);
      return 0;
    } catch (const physio::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
