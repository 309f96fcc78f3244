// Copyright 2026 The qsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/runner.hpp"

namespace {

struct CommandArgs {
  std::string config;
  std::string out = ".";
  int jobs = 1;
};

// 0: no violations, 1: violations, 2: bad usage or config
int execute(const std::string& command, const CommandArgs& args) {
  qsep::ExperimentConfig config;
  try {
    config = qsep::ExperimentConfig::load(args.config);
    if (config.command != command) {
      throw qsep::UsageError("config.command: '" + config.command + "' does not match '" + command + "'");
    }
    const qsep::RunRecord rec = qsep::run(config, args.jobs);
    qsep::save_record(rec, config.output, args.out);
    for (const auto& e : rec.errors) std::cerr << "error: " << e << "\n";
    for (const auto& v : rec.violations) std::cerr << "violation: " << v << "\n";
    std::cout << command << ": " << rec.violations.size() << " violations, " << rec.errors.size() << " errors, "
              << rec.wall_time << " s -> " << (std::filesystem::path(args.out) / config.output).string() << ".*\n";
    return rec.ok() ? 0 : 1;
  } catch (const qsep::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsep: relative entropy of entanglement and finite-dimensional approximation experiments"};
  bool version = false;
  bool fixtures = false;
  app.add_flag("--version", version, "Print the library version");
  app.add_flag("--list-fixtures", fixtures, "List built-in fixture states");
  app.require_subcommand(0, 1);

  std::map<std::string, CommandArgs> args;
  for (const auto& name : qsep::known_commands()) {
    auto* sub = app.add_subcommand(name, "Run the '" + name + "' experiment");
    auto& a = args[name];
    sub->add_option("--config", a.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
    sub->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (version) {
    std::cout << "qsep " << qsep::version_string() << "\n";
    return 0;
  }
  if (fixtures) {
    for (const auto& line : qsep::list_fixtures()) std::cout << line << "\n";
    return 0;
  }
  for (auto* sub : app.get_subcommands()) return execute(sub->get_name(), args[sub->get_name()]);
  std::cerr << app.help();
  return 2;
}
