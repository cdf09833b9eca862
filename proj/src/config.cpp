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

#include "heatlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "heatlab/analysis.hpp"

namespace heatlab {

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "assumptions",     "integral_ft",      "detailed_ft",
      "distribution_ft", "renyi_identity",   "mean_heat",
      "ordered_moments", "characteristic_function",
      "jarzynski_wojcik", "sampling_consistency", "heat_integral_ft"};
  return names;
}

const std::vector<std::string>& default_checks() {
  static const std::vector<std::string> names{
      "assumptions",    "integral_ft", "detailed_ft",     "distribution_ft",
      "renyi_identity", "mean_heat",   "ordered_moments", "characteristic_function"};
  return names;
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  throw ConfigError(msg, mark.line + 1, mark.column + 1);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail_at(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail_at(node, "'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, key));
  return out;
}

// Rejects keys outside `allowed` so that typos do not pass silently.
void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!map.IsMap()) fail_at(map, "'" + where + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail_at(kv.first, "unknown key '" + key + "' in " + where);
  }
}

ModelConfig parse_model(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"kind", "n_sites", "J", "h", "hx", "hz", "hamiltonian", "builtin_charges"},
             where);
  ModelConfig m;
  if (!node["kind"]) fail_at(node, where + " needs 'kind'");
  m.kind = scalar<std::string>(node["kind"], "kind");
  if (m.kind != "xx" && m.kind != "tilted_ising" && m.kind != "custom") {
    fail_at(node["kind"], "unknown model kind '" + m.kind + "' (xx, tilted_ising, custom)");
  }
  if (!node["n_sites"]) fail_at(node, where + " needs 'n_sites'");
  const int n = scalar<int>(node["n_sites"], "n_sites");
  if (n < 1 || n > 12) fail_at(node["n_sites"], "n_sites must be in [1, 12]");
  m.n_sites = static_cast<std::size_t>(n);
  if (node["J"]) m.coupling = scalar<double>(node["J"], "J");
  if (node["h"]) m.field = scalar<double>(node["h"], "h");
  if (node["hx"]) m.hx = scalar<double>(node["hx"], "hx");
  if (node["hz"]) m.hz = scalar<double>(node["hz"], "hz");
  if (node["builtin_charges"]) m.builtin_charges = scalar<bool>(node["builtin_charges"], "builtin_charges");
  if (m.kind == "custom") {
    if (!node["hamiltonian"]) fail_at(node, "custom model needs 'hamiltonian'");
    m.hamiltonian = scalar<std::string>(node["hamiltonian"], "hamiltonian");
  }
  return m;
}

std::vector<ChargeConfig> parse_charges(const YAML::Node& node, const std::string& where,
                                        bool shared) {
  if (!node.IsSequence()) fail_at(node, "'" + where + "' must be a list");
  std::vector<ChargeConfig> out;
  for (const auto& item : node) {
    if (shared) {
      check_keys(item, {"name", "op_A", "op_B"}, where);
    } else {
      check_keys(item, {"name", "op"}, where);
    }
    ChargeConfig c;
    if (!item["name"]) fail_at(item, "charge needs 'name'");
    c.name = scalar<std::string>(item["name"], "name");
    if (shared) {
      if (!item["op_A"] || !item["op_B"]) fail_at(item, "shared charge needs 'op_A' and 'op_B'");
      c.op_a = scalar<std::string>(item["op_A"], "op_A");
      c.op_b = scalar<std::string>(item["op_B"], "op_B");
    } else {
      if (!item["op"]) fail_at(item, "charge needs 'op'");
      c.op = scalar<std::string>(item["op"], "op");
    }
    out.push_back(std::move(c));
  }
  return out;
}

TemperatureConfig parse_temperatures(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"theta", "targets", "theta0"}, where);
  TemperatureConfig t;
  if (node["theta"]) t.theta = number_list(node["theta"], "theta");
  if (node["targets"]) t.targets = number_list(node["targets"], "targets");
  if (node["theta0"]) t.theta0 = number_list(node["theta0"], "theta0");
  if (t.theta.has_value() == t.targets.has_value()) {
    fail_at(node, where + " needs exactly one of 'theta' or 'targets'");
  }
  if (t.theta0 && !t.targets) fail_at(node["theta0"], "'theta0' is only used with 'targets'");
  return t;
}

std::size_t expected_generators(const ExperimentConfig& c, const ModelConfig& m,
                                std::size_t n_exclusive) {
  const std::size_t builtin = (m.kind == "xx" && m.builtin_charges) ? 1 : 0;
  return 1 + builtin + c.shared.size() + n_exclusive;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("malformed config: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping", 1, 1);
  check_keys(root,
             {"schema_version", "name", "model_A", "model_B", "charges", "temperatures",
              "coupling", "tau", "tau_list", "z_grid", "u_grid", "mode", "checks", "output",
              "enumerate_cap", "dim_cap", "fit"},
             "config");

  ExperimentConfig c;
  if (!root["schema_version"]) fail_at(root, "config needs 'schema_version'");
  c.schema_version = scalar<int>(root["schema_version"], "schema_version");
  if (c.schema_version != kConfigSchemaVersion) {
    fail_at(root["schema_version"], "unsupported schema_version " +
                                        std::to_string(c.schema_version) + " (expected " +
                                        std::to_string(kConfigSchemaVersion) + ")");
  }
  if (root["name"]) c.name = scalar<std::string>(root["name"], "name");
  if (!root["model_A"] || !root["model_B"]) fail_at(root, "config needs 'model_A' and 'model_B'");
  c.model_a = parse_model(root["model_A"], "model_A");
  c.model_b = parse_model(root["model_B"], "model_B");

  if (const auto ch = root["charges"]) {
    check_keys(ch, {"shared", "exclusive_A", "exclusive_B"}, "charges");
    if (ch["shared"]) c.shared = parse_charges(ch["shared"], "charges.shared", true);
    if (ch["exclusive_A"]) c.exclusive_a = parse_charges(ch["exclusive_A"], "charges.exclusive_A", false);
    if (ch["exclusive_B"]) c.exclusive_b = parse_charges(ch["exclusive_B"], "charges.exclusive_B", false);
  }
  const bool builtin_a = c.model_a.kind == "xx" && c.model_a.builtin_charges;
  const bool builtin_b = c.model_b.kind == "xx" && c.model_b.builtin_charges;
  if (builtin_a != builtin_b) {
    fail_at(root["model_B"], "both sides must carry the same shared charges (Mz on one side only)");
  }

  if (!root["temperatures"]) fail_at(root, "config needs 'temperatures'");
  const auto temps = root["temperatures"];
  check_keys(temps, {"A", "B"}, "temperatures");
  if (!temps["A"] || !temps["B"]) fail_at(temps, "temperatures need 'A' and 'B'");
  c.temps_a = parse_temperatures(temps["A"], "temperatures.A");
  c.temps_b = parse_temperatures(temps["B"], "temperatures.B");
  auto check_len = [&](const TemperatureConfig& t, const YAML::Node& node, std::size_t n) {
    for (const char* key : {"theta", "targets", "theta0"}) {
      if (node[key] && node[key].size() != n) {
        fail_at(node[key], std::string("'") + key + "' needs " + std::to_string(n) +
                               " entries (H, shared charges, exclusive charges)");
      }
    }
    (void)t;
  };
  check_len(c.temps_a, temps["A"], expected_generators(c, c.model_a, c.exclusive_a.size()));
  check_len(c.temps_b, temps["B"], expected_generators(c, c.model_b, c.exclusive_b.size()));

  if (!root["coupling"]) fail_at(root, "config needs 'coupling'");
  const auto cp = root["coupling"];
  check_keys(cp, {"kind", "g", "g_list", "expr"}, "coupling");
  if (cp["kind"]) c.coupling_kind = scalar<std::string>(cp["kind"], "kind");
  if (c.coupling_kind != "exchange" && c.coupling_kind != "ising" && c.coupling_kind != "custom") {
    fail_at(cp["kind"], "unknown coupling kind '" + c.coupling_kind + "' (exchange, ising, custom)");
  }
  if (c.coupling_kind == "custom") {
    if (!cp["expr"]) fail_at(cp, "custom coupling needs 'expr'");
    c.coupling_expr = scalar<std::string>(cp["expr"], "expr");
  }
  if (cp["g"]) c.g = scalar<double>(cp["g"], "g");
  if (cp["g_list"]) {
    c.g_list = number_list(cp["g_list"], "g_list");
    for (std::size_t i = 0; i < c.g_list.size(); ++i) {
      if (c.g_list[i] < 0.0 || (i > 0 && c.g_list[i] >= c.g_list[i - 1])) {
        fail_at(cp["g_list"], "'g_list' must be non-negative and strictly descending");
      }
    }
  }
  if (!c.g && c.g_list.empty()) fail_at(cp, "coupling needs 'g' or 'g_list'");

  if (root["tau"]) c.tau = scalar<double>(root["tau"], "tau");
  if (root["tau_list"]) c.tau_list = number_list(root["tau_list"], "tau_list");
  if (!c.tau && c.tau_list.empty()) fail_at(root, "config needs 'tau' or 'tau_list'");
  for (const double t : c.tau_list) {
    if (t < 0.0) fail_at(root["tau_list"], "'tau_list' entries must be >= 0");
  }
  if (c.tau && *c.tau < 0.0) fail_at(root["tau"], "'tau' must be >= 0");

  c.z_grid = root["z_grid"] ? number_list(root["z_grid"], "z_grid") : kDefaultZGrid;
  for (const double z : c.z_grid) {
    if (z == 1.0) fail_at(root["z_grid"], "z_grid must not contain 1 (covered by mean_heat)");
  }
  c.u_grid = root["u_grid"] ? number_list(root["u_grid"], "u_grid") : kDefaultUGrid;

  if (const auto mode = root["mode"]) {
    if (mode.IsScalar()) {
      const auto m = scalar<std::string>(mode, "mode");
      if (m != "enumerate") fail_at(mode, "mode must be 'enumerate' or a 'sample' mapping");
    } else {
      check_keys(mode, {"sample"}, "mode");
      const auto s = mode["sample"];
      check_keys(s, {"count", "seed"}, "mode.sample");
      c.sample = true;
      if (s["count"]) {
        const auto count = scalar<long long>(s["count"], "count");
        if (count < 1) fail_at(s["count"], "sample count must be >= 1");
        c.sample_count = static_cast<std::uint64_t>(count);
      }
      if (s["seed"]) c.seed = scalar<std::uint64_t>(s["seed"], "seed");
    }
  }

  if (const auto checks = root["checks"]) {
    if (!checks.IsSequence()) fail_at(checks, "'checks' must be a list");
    for (const auto& item : checks) {
      const auto name = scalar<std::string>(item, "checks");
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        fail_at(item, "unknown check '" + name + "'");
      }
      c.checks.push_back(name);
    }
  } else {
    c.checks = default_checks();
    if (c.sample) c.checks = {"assumptions", "integral_ft", "sampling_consistency"};
  }
  if (c.sample) {
    for (const auto& name : c.checks) {
      if (name != "assumptions" && name != "integral_ft" && name != "heat_integral_ft" &&
          name != "sampling_consistency") {
        fail_at(root["checks"] ? root["checks"] : root,
                "check '" + name + "' needs enumerate mode");
      }
    }
  }

  if (root["output"]) c.output = scalar<std::string>(root["output"], "output");
  if (root["enumerate_cap"]) {
    const int cap = scalar<int>(root["enumerate_cap"], "enumerate_cap");
    if (cap < 1) fail_at(root["enumerate_cap"], "enumerate_cap must be positive");
    c.enumerate_cap = static_cast<std::size_t>(cap);
  }
  if (root["dim_cap"]) {
    const int cap = scalar<int>(root["dim_cap"], "dim_cap");
    if (cap < 1) fail_at(root["dim_cap"], "dim_cap must be positive");
    c.dim_cap = static_cast<std::size_t>(cap);
  }
  const std::size_t joint = (std::size_t{1} << c.model_a.n_sites) << c.model_b.n_sites;
  if (joint > c.dim_cap) {
    fail_at(root["model_B"], "joint dimension " + std::to_string(joint) + " exceeds dim_cap " +
                                 std::to_string(c.dim_cap));
  }
  if (!c.sample && joint > c.enumerate_cap) {
    fail_at(root["model_B"], "enumerate mode needs joint dimension <= " +
                                 std::to_string(c.enumerate_cap) + ", got " +
                                 std::to_string(joint) + "; use mode: {sample: ...}");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

void emit_model(YAML::Emitter& out, const ModelConfig& m) {
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << m.kind;
  out << YAML::Key << "n_sites" << YAML::Value << m.n_sites;
  if (m.kind == "custom") {
    out << YAML::Key << "hamiltonian" << YAML::Value << YAML::DoubleQuoted << m.hamiltonian;
  } else {
    out << YAML::Key << "J" << YAML::Value << m.coupling;
    if (m.kind == "xx") {
      out << YAML::Key << "h" << YAML::Value << m.field;
      out << YAML::Key << "builtin_charges" << YAML::Value << m.builtin_charges;
    } else {
      out << YAML::Key << "hx" << YAML::Value << m.hx;
      out << YAML::Key << "hz" << YAML::Value << m.hz;
    }
  }
  out << YAML::EndMap;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const double x : v) out << x;
  out << YAML::EndSeq;
}

void emit_temps(YAML::Emitter& out, const TemperatureConfig& t) {
  out << YAML::BeginMap;
  if (t.theta) {
    out << YAML::Key << "theta" << YAML::Value;
    emit_list(out, *t.theta);
  }
  if (t.targets) {
    out << YAML::Key << "targets" << YAML::Value;
    emit_list(out, *t.targets);
  }
  if (t.theta0) {
    out << YAML::Key << "theta0" << YAML::Value;
    emit_list(out, *t.theta0);
  }
  out << YAML::EndMap;
}

void emit_charges(YAML::Emitter& out, const std::vector<ChargeConfig>& list, bool shared) {
  out << YAML::BeginSeq;
  for (const auto& c : list) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name;
    if (shared) {
      out << YAML::Key << "op_A" << YAML::Value << YAML::DoubleQuoted << c.op_a;
      out << YAML::Key << "op_B" << YAML::Value << YAML::DoubleQuoted << c.op_b;
    } else {
      out << YAML::Key << "op" << YAML::Value << YAML::DoubleQuoted << c.op;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
  if (!c.name.empty()) out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "model_A" << YAML::Value;
  emit_model(out, c.model_a);
  out << YAML::Key << "model_B" << YAML::Value;
  emit_model(out, c.model_b);
  if (!c.shared.empty() || !c.exclusive_a.empty() || !c.exclusive_b.empty()) {
    out << YAML::Key << "charges" << YAML::Value << YAML::BeginMap;
    if (!c.shared.empty()) {
      out << YAML::Key << "shared" << YAML::Value;
      emit_charges(out, c.shared, true);
    }
    if (!c.exclusive_a.empty()) {
      out << YAML::Key << "exclusive_A" << YAML::Value;
      emit_charges(out, c.exclusive_a, false);
    }
    if (!c.exclusive_b.empty()) {
      out << YAML::Key << "exclusive_B" << YAML::Value;
      emit_charges(out, c.exclusive_b, false);
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "temperatures" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A" << YAML::Value;
  emit_temps(out, c.temps_a);
  out << YAML::Key << "B" << YAML::Value;
  emit_temps(out, c.temps_b);
  out << YAML::EndMap;
  out << YAML::Key << "coupling" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.coupling_kind;
  if (c.coupling_kind == "custom") {
    out << YAML::Key << "expr" << YAML::Value << YAML::DoubleQuoted << c.coupling_expr;
  }
  if (c.g) out << YAML::Key << "g" << YAML::Value << *c.g;
  if (!c.g_list.empty()) {
    out << YAML::Key << "g_list" << YAML::Value;
    emit_list(out, c.g_list);
  }
  out << YAML::EndMap;
  if (c.tau) out << YAML::Key << "tau" << YAML::Value << *c.tau;
  if (!c.tau_list.empty()) {
    out << YAML::Key << "tau_list" << YAML::Value;
    emit_list(out, c.tau_list);
  }
  out << YAML::Key << "z_grid" << YAML::Value;
  emit_list(out, c.z_grid);
  out << YAML::Key << "u_grid" << YAML::Value;
  emit_list(out, c.u_grid);
  if (c.sample) {
    out << YAML::Key << "mode" << YAML::Value << YAML::BeginMap << YAML::Key << "sample"
        << YAML::Value << YAML::BeginMap << YAML::Key << "count" << YAML::Value << c.sample_count
        << YAML::Key << "seed" << YAML::Value << c.seed << YAML::EndMap << YAML::EndMap;
  } else {
    out << YAML::Key << "mode" << YAML::Value << "enumerate";
  }
  out << YAML::Key << "checks" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& name : c.checks) out << name;
  out << YAML::EndSeq;
  if (!c.output.empty()) out << YAML::Key << "output" << YAML::Value << c.output;
  out << YAML::Key << "enumerate_cap" << YAML::Value << c.enumerate_cap;
  out << YAML::Key << "dim_cap" << YAML::Value << c.dim_cap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::pair<SystemSpec, SystemSpec> build_specs(const ExperimentConfig& c, bool check_commutation) {
  auto build = [check_commutation](const ModelConfig& m, Side side) {
    SystemSpec spec;
    if (m.kind == "custom" && !check_commutation) {
      spec.label = side;
      spec.model = "custom";
      spec.n_sites = m.n_sites;
      spec.hamiltonian = pauli::parse_sum(m.hamiltonian, m.n_sites);
    } else if (m.kind == "xx") {
      spec = build_xx_chain(m.n_sites, m.coupling, m.field, side);
      if (!m.builtin_charges) spec.shared_charges.clear();
    } else if (m.kind == "tilted_ising") {
      spec = build_tilted_ising_chain(m.n_sites, m.coupling, m.hx, m.hz, side);
    } else {
      spec = build_custom_system(m.n_sites, pauli::parse_sum(m.hamiltonian, m.n_sites), side);
    }
    return spec;
  };
  SystemSpec a = build(c.model_a, Side::A);
  SystemSpec b = build(c.model_b, Side::B);
  auto attach = [check_commutation](SystemSpec spec, const std::string& name,
                                    const std::string& text, bool shared) {
    OperatorMatrix op = pauli::parse_sum(text, spec.n_sites);
    if (check_commutation) {
      return shared ? add_shared_charge(std::move(spec), name, op)
                    : add_exclusive_charge(std::move(spec), name, op);
    }
    auto& list = shared ? spec.shared_charges : spec.exclusive_charges;
    list.push_back(NamedOperator{name, std::move(op)});
    return spec;
  };
  for (const auto& s : c.shared) {
    a = attach(std::move(a), s.name, s.op_a, true);
    b = attach(std::move(b), s.name, s.op_b, true);
  }
  for (const auto& e : c.exclusive_a) a = attach(std::move(a), e.name, e.op, false);
  for (const auto& e : c.exclusive_b) b = attach(std::move(b), e.name, e.op, false);
  return {std::move(a), std::move(b)};
}

CouplingKind build_coupling(const ExperimentConfig& c, const SystemSpec& a, const SystemSpec& b) {
  if (c.coupling_kind == "exchange") return coupling::Exchange{};
  if (c.coupling_kind == "ising") return coupling::Ising{};
  return coupling::Custom{pauli::parse_sum(c.coupling_expr, a.n_sites, b.n_sites)};
}

ProtocolInput resolve_input(ExperimentConfig& c) {
  auto [a, b] = build_specs(c);
  ProtocolInput in;
  in.coupling = build_coupling(c, a, b);
  auto resolve = [](const SystemSpec& spec, TemperatureConfig& t) {
    if (t.theta) {
      return GeneralizedTemperatures::for_spec(
          spec, Eigen::Map<const RVector>(t.theta->data(), static_cast<Eigen::Index>(t.theta->size())));
    }
    const RVector targets =
        Eigen::Map<const RVector>(t.targets->data(), static_cast<Eigen::Index>(t.targets->size()));
    GeneralizedTemperatures theta0 = GeneralizedTemperatures::zeros(spec);
    if (t.theta0) {
      theta0.values = Eigen::Map<const RVector>(t.theta0->data(),
                                                static_cast<Eigen::Index>(t.theta0->size()));
    }
    const FitResult fit = fit_temperatures(spec, MomentTargets{targets}, theta0);
    t.theta = std::vector<double>(fit.theta.values.begin(), fit.theta.values.end());
    t.targets.reset();
    t.theta0.reset();
    return fit.theta;
  };
  in.temps_a = resolve(a, c.temps_a);
  in.temps_b = resolve(b, c.temps_b);
  in.spec_a = std::move(a);
  in.spec_b = std::move(b);
  in.g = c.g.value_or(c.g_list.empty() ? 0.0 : c.g_list.front());
  in.tau = c.tau.value_or(c.tau_list.empty() ? 0.0 : c.tau_list.front());
  in.dim_cap = c.dim_cap;
  return in;
}

}  // namespace heatlab
