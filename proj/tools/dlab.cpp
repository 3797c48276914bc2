// dlab: config-driven runner for the dispersive measurement experiments.
//   dlab run <config.json> [--set k=v]... [--jobs N]
//   dlab list
//   dlab validate <config.json>
//   dlab defaults <experiment-id>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlab/experiments.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  return j;
}

// --set a.b.c=value with JSON-parsed values, falling back to a raw string
void apply_override(nlohmann::json& config, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got '" + kv + "'");
  std::string key = kv.substr(0, eq);
  std::string raw = kv.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  nlohmann::json* node = &config;
  size_t pos = 0;
  while (true) {
    auto dot = key.find('.', pos);
    std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dispersive measurement lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "execute an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--set", overrides, "override config values, dotted key=value");
  run->add_option("--jobs", jobs, "worker cap (runs are serial when 1)")
      ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list the available experiments");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", validate_path, "config file")->required();

  std::string defaults_id;
  auto* defaults = app.add_subcommand("defaults", "print the reference config for an experiment");
  defaults->add_option("experiment", defaults_id, "experiment id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& row : dlab::list_experiments())
        std::printf("%-16s %-55s %s\n", row.id.c_str(), row.description.c_str(),
                    row.measures.c_str());
      return 0;
    }
    if (defaults->parsed()) {
      std::cout << dlab::default_config(defaults_id).dump(2) << "\n";
      return 0;
    }
    if (validate->parsed()) {
      dlab::validate_config(load_config(validate_path));
      std::printf("ok\n");
      return 0;
    }
    // run
    nlohmann::json config = load_config(config_path);
    for (const auto& kv : overrides) apply_override(config, kv);
    (void)jobs;
    dlab::RunResult result = dlab::run_experiment(config);
    for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
    std::printf("%s\n", result.message.c_str());
    return result.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
