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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsep/qmat.hpp"

namespace qsep {

const char* version_string();

const std::vector<std::string>& known_commands();

struct ExperimentConfig {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::string output;                 // file stem; defaults to the command
  std::filesystem::path base_dir = ".";  // relative input paths resolve here

  /// Throws UsageError naming the failing field.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunRecord {
  nlohmann::json config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> violations;
  std::vector<std::string> errors;  // per-cell numeric failures
  double wall_time = 0.0;
  std::string version;
  std::map<std::string, std::string> tables;  // file name -> CSV text

  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

/// "fixture:<name>", a path to a state JSON file, or an inline state object.
DensityOp resolve_state(const nlohmann::json& ref, const std::filesystem::path& base_dir);

RunRecord run(const ExperimentConfig& config, int jobs = 1);

/// Writes every table and <stem>.json into `dir`.
void save_record(const RunRecord& record, const std::string& stem, const std::filesystem::path& dir);

}  // namespace qsep
