// btcsense command line: one subcommand per experiment plus `repro`.
//
//   btcsense <experiment> --config spec.yaml [--out dir] [--workers n]
//            [--override key.path=value ...]
//   btcsense repro [--config configs] [--out dir] [--workers n]
//
// Precedence: --override beats the config file, which beats built-in
// defaults. The subcommand fixes the experiment; a config naming a
// different one is rejected.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btcsense/runner.hpp"

namespace rn = btc::runner;

int main(int argc, char** argv) {
  CLI::App app{"Boundary time crystal phase-sensing toolkit"};
  app.set_version_flag("--version", BTCSENSE_VERSION);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  int workers = 1;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config,
                                config_required ? "YAML run spec" : "directory of YAML run specs [configs]");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads")->capture_default_str();
  };

  for (const auto& name : rn::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_common(sub, true);
    sub->add_option("--override", overrides, "key.path=value (value parsed as YAML)");
  }
  auto* repro = app.add_subcommand("repro", "run every spec in a config directory");
  add_common(repro, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == repro) return rn::repro(config.empty() ? "configs" : config, out_dir, workers, std::cerr);

    std::ifstream in(config);
    if (!in) {
      std::cerr << "validation error: --config: cannot read '" << config << "'\n";
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();

    std::vector<std::string> errors;
    // The subcommand supplies the experiment when the file leaves it out.
    rn::RunSpec spec = rn::parse_spec(ss.str(), overrides, errors);
    const auto wanted = rn::experiment_from_string(sub->get_name());
    if (errors.empty() && !spec.experiment) {
      std::vector<std::string> all = overrides;
      all.push_back("experiment=" + sub->get_name());
      spec = rn::parse_spec(ss.str(), all, errors);
    } else if (spec.experiment && spec.experiment != wanted) {
      errors.push_back("experiment: config says '" + std::string(rn::to_string(*spec.experiment)) +
                       "' but the subcommand is '" + sub->get_name() + "'");
    }
    if (!errors.empty()) {
      for (const auto& e : errors) std::cerr << "validation error: " << e << '\n';
      return 1;
    }
    return rn::run(spec, out_dir, workers, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
