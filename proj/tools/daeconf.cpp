// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

// Experiment runner: one subcommand per task, driven by a key = value config
// file plus per-field flag overrides.

#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "daeconf/experiments.hpp"

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitBadInput = 2;

struct TaskOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;
  bool print_config = false;
};

daeconf::ExperimentConfig build_config(daeconf::Task task, const TaskOptions& o) {
  daeconf::ExperimentConfig c = daeconf::default_config(task);
  if (!o.config_file.empty()) {
    c = daeconf::load_config(o.config_file);
    if (c.task != task)
      throw daeconf::ConfigError("task", "config file is for '" + daeconf::to_string(c.task) + "', not '" +
                                             daeconf::to_string(task) + "'");
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw daeconf::ConfigError(s, "--set expects key=value");
    daeconf::set_field(c, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [key, value] : o.overrides) daeconf::set_field(c, key, value);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoising-autoencoder confidence experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", daeconf::version());

  std::map<daeconf::Task, TaskOptions> options;
  std::map<daeconf::Task, CLI::App*> commands;
  for (daeconf::Task task : daeconf::all_tasks()) {
    const std::string name = daeconf::to_string(task);
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    auto& o = options[task];
    sub->add_option("-c,--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "override a field, key=value (repeatable)");
    sub->add_flag("--print-config", o.print_config, "print the effective config and exit");
    for (const auto& key : daeconf::config_keys()) {
      if (key == "task") continue;
      sub->add_option_function<std::string>(
          "--" + key, [&o, key](const std::string& v) { o.overrides[key] = v; }, "config field '" + key + "'");
    }
    commands[task] = sub;
  }
  CLI11_PARSE(app, argc, argv);

  for (const auto& [task, sub] : commands) {
    if (!sub->parsed()) continue;
    daeconf::ExperimentConfig config;
    try {
      config = build_config(task, options[task]);
    } catch (const std::exception& e) {
      std::cerr << "daeconf: invalid configuration: " << e.what() << '\n';
      return kExitBadInput;
    }
    if (options[task].print_config) {
      std::cout << daeconf::emit_config(config);
      return 0;
    }
    try {
      std::cout << "daeconf " << daeconf::to_string(task) << " -> " << daeconf::resolve_out_dir(config).string()
                << '\n';
      const auto result = daeconf::run_experiment(config, &std::cout);
      std::cout << "wrote " << result.files.size() << " files plus manifest.json in " << result.wall_seconds
                << " s\n";
      return result.exit_code == 0 ? 0 : kExitFailedCheck;
    } catch (const daeconf::ConfigError& e) {
      std::cerr << "daeconf: invalid configuration: " << e.what() << '\n';
      return kExitBadInput;
    } catch (const std::exception& e) {
      std::cerr << "daeconf: " << e.what() << '\n';
      return kExitBadInput;
    }
  }
  return kExitBadInput;
}
