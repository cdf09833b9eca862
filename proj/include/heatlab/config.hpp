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
#include <optional>
#include <string>
#include <vector>

#include "heatlab/error.hpp"
#include "heatlab/gge.hpp"
#include "heatlab/models.hpp"
#include "heatlab/protocol.hpp"

namespace heatlab {

inline constexpr int kConfigSchemaVersion = 1;

/// Config validation failure anchored at a line of the config file.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ModelConfig {
  std::string kind = "xx";  // xx | tilted_ising | custom
  std::size_t n_sites = 2;
  double coupling = 1.0;  // J
  double field = 0.0;     // h (xx)
  double hx = 0.0;        // tilted_ising
  double hz = 0.0;        // tilted_ising
  std::string hamiltonian;  // custom: Pauli sum
  bool builtin_charges = true;
};

struct ChargeConfig {
  std::string name;
  std::string op;    // exclusive charges
  std::string op_a;  // shared charges
  std::string op_b;
};

struct TemperatureConfig {
  std::optional<std::vector<double>> theta;
  std::optional<std::vector<double>> targets;
  std::optional<std::vector<double>> theta0;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  ModelConfig model_a;
  ModelConfig model_b;
  std::vector<ChargeConfig> shared;
  std::vector<ChargeConfig> exclusive_a;
  std::vector<ChargeConfig> exclusive_b;
  TemperatureConfig temps_a;
  TemperatureConfig temps_b;
  std::string coupling_kind = "exchange";
  std::string coupling_expr;  // custom coupling, Pauli sum over A and B sites
  std::optional<double> g;
  std::vector<double> g_list;
  std::optional<double> tau;
  std::vector<double> tau_list;
  std::vector<double> z_grid;
  std::vector<double> u_grid;
  bool sample = false;
  std::uint64_t sample_count = 100000;
  std::uint64_t seed = 0;
  std::vector<std::string> checks;
  std::string output;
  std::size_t enumerate_cap = 256;
  std::size_t dim_cap = kDefaultDimCap;
};

/// Check names understood by the runner.
const std::vector<std::string>& known_checks();
/// Checks run when the config names none.
const std::vector<std::string>& default_checks();

/// Parses and validates a config document. Throws ConfigError anchored at
/// the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Serializes a config to YAML; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const ExperimentConfig& config);

/// Subsystem specs with their declared charges. Propagates
/// CommutationError for charges that do not commute unless
/// `check_commutation` is false, in which case the charges are attached
/// as declared for verify_assumptions to inspect.
std::pair<SystemSpec, SystemSpec> build_specs(const ExperimentConfig& config,
                                              bool check_commutation = true);

CouplingKind build_coupling(const ExperimentConfig& config, const SystemSpec& a,
                            const SystemSpec& b);

/// Resolved protocol input: explicit temperatures are taken as given,
/// moment targets are fitted. The fitted values are written back into
/// `config` as explicit theta so that the echo reproduces the run.
ProtocolInput resolve_input(ExperimentConfig& config);

}  // namespace heatlab
