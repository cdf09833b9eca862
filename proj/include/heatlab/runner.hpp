// Copyright 2026 The heatlab Authors
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
#include <iosfwd>
#include <optional>
#include <string>

namespace heatlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kResultSchemaVersion = 1;

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<std::string> out;     // overrides the config output directory
};

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Runs the protocol once and writes config.yaml, result.yaml,
/// distribution.csv and report.csv into the output directory.
int cmd_run(const std::string& config_path, const RunOptions& options, std::ostream& out,
            std::ostream& err);

/// Sweeps the g list (then the tau list) and writes scan.csv and result.yaml.
int cmd_scan(const std::string& config_path, const RunOptions& options, std::ostream& out,
             std::ostream& err);

/// Checks commutation, reality and target feasibility without evolving.
int cmd_verify(const std::string& config_path, const RunOptions& options, std::ostream& out,
               std::ostream& err);

}  // namespace heatlab
