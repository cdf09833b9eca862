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

#include "heatlab/runner.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Core>
#include <yaml-cpp/yaml.h>

#include "heatlab/analysis.hpp"
#include "heatlab/config.hpp"

namespace heatlab {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no negative zero in tables
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Holds `<dir>/.lock` for the lifetime of a run.
class RunDirectory {
 public:
  explicit RunDirectory(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
    lock_ = dir_ / ".lock";
    fd_ = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw Error("output directory '" + dir_.string() + "' is owned by another run (" +
                  lock_.string() + " exists)");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
  }
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;
  ~RunDirectory() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(lock_, ec);
  }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error("cannot write '" + (dir_ / name).string() + "'");
  }

 private:
  fs::path dir_;
  fs::path lock_;
  int fd_ = -1;
};

fs::path output_dir(const ExperimentConfig& c, const RunOptions& o, const std::string& config_path) {
  if (o.out) return *o.out;
  if (!c.output.empty()) return c.output;
  const std::string stem = c.name.empty() ? fs::path(config_path).stem().string() : c.name;
  return fs::path("heatlab_out") / stem;
}

ExperimentConfig load(const std::string& path, const RunOptions& o) {
  ExperimentConfig c = load_config(path);
  if (o.seed) c.seed = *o.seed;
  return c;
}

std::vector<AssumptionCheck> assumption_rows(const CompositeSystem& cs) {
  std::vector<AssumptionCheck> rows = verify_assumptions(cs).checks;
  const double hab_scale = std::max(1.0, cs.coupling.scale());
  for (std::size_t k = 0; k < cs.conservation.shared_charge_norms.size(); ++k) {
    const auto& name = cs.spec_a.shared_charges[k].name;
    const double charge_scale = std::max(
        1.0, cs.spec_a.shared_charges[k].op.scale() + cs.spec_b.shared_charges[k].op.scale());
    const double tol = kCommutationTolerance * hab_scale * charge_scale;
    const double norm = cs.conservation.shared_charge_norms[k];
    rows.push_back({"[H_AB, " + name + "_A + " + name + "_B]", norm, tol, norm <= tol});
  }
  return rows;
}

int report_error(std::ostream& err, const std::string& path, const Error& e) {
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && ce->line() > 0) {
    err << path << ":" << ce->line() << ":" << ce->column() << ": error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (dynamic_cast<const InfeasibleTargetError*>(&e)) {
    err << path << ": error: infeasible target: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (const auto* ne = dynamic_cast<const NumericalError*>(&e)) {
    err << path << ": numerical failure: " << e.what() << " (residual " << num(ne->residual())
        << ")\n";
    return kExitCheckFailed;
  }
  err << path << ": error: " << e.what() << "\n";
  return kExitConfigError;
}

template <typename Fn>
int guarded(const std::string& path, std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return report_error(err, path, e);
  } catch (const std::exception& e) {
    err << path << ": error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

// ---------------------------------------------------------------------------
// YAML helpers

void emit_vector(YAML::Emitter& y, const RVector& v) {
  y << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) y << v(i);
  y << YAML::EndSeq;
}

void emit_complex_list(YAML::Emitter& y, const std::vector<Complex>& v) {
  y << YAML::BeginSeq;
  for (const auto& c : v) y << YAML::Flow << YAML::BeginSeq << c.real() << c.imag() << YAML::EndSeq;
  y << YAML::EndSeq;
}

void emit_header(YAML::Emitter& y, const std::string& command, const ExperimentConfig& c) {
  y << YAML::Key << "schema_version" << YAML::Value << kResultSchemaVersion;
  y << YAML::Key << "command" << YAML::Value << command;
  y << YAML::Key << "versions" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "heatlab" << YAML::Value << kVersion;
  y << YAML::Key << "eigen" << YAML::Value
    << (std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
        std::to_string(EIGEN_MINOR_VERSION));
  y << YAML::EndMap;
  y << YAML::Key << "seed" << YAML::Value << c.seed;
  y << YAML::Key << "config" << YAML::Value << YAML::Load(dump_config(c));
}

void emit_theta(YAML::Emitter& y, const SystemSpec& spec, const GeneralizedTemperatures& t) {
  const auto names = spec.generator_names();
  y << YAML::BeginMap;
  y << YAML::Key << "generators" << YAML::Value << YAML::Flow << names;
  y << YAML::Key << "theta" << YAML::Value;
  emit_vector(y, t.values);
  y << YAML::EndMap;
}

void emit_report(YAML::Emitter& y, const VerificationReport& r) {
  y << YAML::BeginMap;
  y << YAML::Key << "name" << YAML::Value << r.name;
  if (!r.grid_label.empty()) {
    y << YAML::Key << "grid_label" << YAML::Value << r.grid_label;
    y << YAML::Key << "grid" << YAML::Value << YAML::Flow << r.grid;
  }
  y << YAML::Key << "lhs" << YAML::Value;
  emit_complex_list(y, r.lhs);
  y << YAML::Key << "rhs" << YAML::Value;
  emit_complex_list(y, r.rhs);
  y << YAML::Key << "max_error" << YAML::Value << r.max_error;
  y << YAML::Key << "tolerance" << YAML::Value << r.tolerance;
  y << YAML::Key << "relative" << YAML::Value << r.relative;
  y << YAML::Key << "statistical" << YAML::Value << r.statistical;
  if (r.statistical) y << YAML::Key << "standard_error" << YAML::Value << r.standard_error;
  y << YAML::Key << "passed" << YAML::Value << r.passed;
  if (!r.diagnostics.empty()) {
    y << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : r.diagnostics) y << YAML::Key << k << YAML::Value << v;
    y << YAML::EndMap;
  }
  y << YAML::EndMap;
}

void emit_assumptions(YAML::Emitter& y, const std::vector<AssumptionCheck>& rows) {
  y << YAML::BeginSeq;
  for (const auto& a : rows) {
    y << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << a.name
      << YAML::Key << "value" << YAML::Value << a.value << YAML::Key << "tolerance"
      << YAML::Value << a.tolerance << YAML::Key << "passed" << YAML::Value << a.passed
      << YAML::EndMap;
  }
  y << YAML::EndSeq;
}

constexpr Quantity kQuantities[] = {Quantity::sigma, Quantity::heat_a, Quantity::heat_b};

std::string value_kind(Quantity q) {
  return q == Quantity::sigma ? "sigma" : q == Quantity::heat_a ? "heat_A" : "heat_B";
}

// ---------------------------------------------------------------------------
// Checks

VerificationReport assumption_report(const std::vector<AssumptionCheck>& rows) {
  VerificationReport r;
  r.name = "assumptions";
  r.passed = true;
  // Worst residual relative to its own tolerance; passes iff <= 1.
  for (const auto& a : rows) {
    const double ratio = a.tolerance > 0.0 ? a.value / a.tolerance : (a.value > 0.0 ? INFINITY : 0.0);
    r.max_error = std::max(r.max_error, ratio);
    r.passed = r.passed && a.passed;
    r.diagnostics.emplace_back(a.name, a.value);
  }
  r.tolerance = 1.0;
  r.relative = true;
  r.lhs = {r.max_error};
  r.rhs = {0.0};
  return r;
}

std::vector<VerificationReport> run_checks(const ExperimentConfig& c, const ProtocolRun& run,
                                           const JointDistribution& jd,
                                           const std::vector<AssumptionCheck>& assumptions) {
  std::vector<VerificationReport> out;
  for (const auto& name : c.checks) {
    if (name == "assumptions") {
      out.push_back(assumption_report(assumptions));
    } else if (name == "integral_ft") {
      out.push_back(integral_ft(jd));
    } else if (name == "heat_integral_ft") {
      out.push_back(integral_ft(jd, Quantity::heat_a));
    } else if (name == "detailed_ft") {
      out.push_back(detailed_ft_check(jd));
    } else if (name == "distribution_ft") {
      out.push_back(distribution_ft_check(jd));
    } else if (name == "renyi_identity") {
      out.push_back(renyi_identity_check(jd, run.rho0, run.rho_tau, c.z_grid));
    } else if (name == "mean_heat") {
      out.push_back(mean_heat_check(jd, run.rho0, run.rho_tau));
    } else if (name == "ordered_moments") {
      out.push_back(ordered_moment_check(jd, run.rho0, run.rho_tau));
    } else if (name == "characteristic_function") {
      out.push_back(characteristic_function_check(jd, run.exponent, run.evolution.unitary, c.u_grid));
    } else if (name == "jarzynski_wojcik") {
      out.push_back(jarzynski_wojcik_reduction(run));
    } else if (name == "sampling_consistency") {
      if (!jd.sampled) throw ConfigError("check 'sampling_consistency' needs sample mode");
      out.push_back(sampling_consistency(jd, run.distribution));
    }
  }
  return out;
}

void print_reports(std::ostream& os, const std::vector<VerificationReport>& reports) {
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %24s %12s  %s\n", "check", "max_error", "tolerance",
                "status");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-28s %24.17g %12.3g  %s\n", r.name.c_str(), r.max_error,
                  r.tolerance, r.passed ? "pass" : "FAIL");
    os << line;
  }
}

}  // namespace

int cmd_run(const std::string& path, const RunOptions& options, std::ostream& out,
            std::ostream& err) {
  return guarded(path, err, [&] {
    ExperimentConfig config = load(path, options);
    if (!config.tau) {
      if (config.tau_list.size() != 1) {
        throw ConfigError("run needs a single 'tau'; use scan for tau lists");
      }
    }
    if (!config.g && config.g_list.size() != 1) {
      throw ConfigError("run needs a single 'g'; use scan for g lists");
    }
    const ProtocolInput input = resolve_input(config);
    const ProtocolRun run = run_protocol(input);
    JointDistribution jd = config.sample
                               ? sample_protocol(run, config.sample_count, config.seed,
                                                 std::max(1u, options.threads))
                               : run.distribution;
    const auto assumptions = assumption_rows(run.system);
    const auto reports = run_checks(config, run, jd, assumptions);

    std::string distribution = "value_kind,value,probability\n";
    YAML::Emitter y;
    y.SetDoublePrecision(17);
    y << YAML::BeginMap;
    emit_header(y, "run", config);
    y << YAML::Key << "resolved" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "A" << YAML::Value;
    emit_theta(y, run.state_a.spec, input.temps_a);
    y << YAML::Key << "B" << YAML::Value;
    emit_theta(y, run.state_b.spec, input.temps_b);
    y << YAML::Key << "g" << YAML::Value << input.g;
    y << YAML::Key << "tau" << YAML::Value << input.tau;
    y << YAML::Key << "dim_A" << YAML::Value << run.state_a.spec.dim();
    y << YAML::Key << "dim_B" << YAML::Value << run.state_b.spec.dim();
    y << YAML::EndMap;

    y << YAML::Key << "distributions" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "mode" << YAML::Value << (jd.sampled ? "sample" : "enumerate");
    if (jd.sampled) y << YAML::Key << "sample_count" << YAML::Value << jd.sample_count;
    y << YAML::Key << "total_probability" << YAML::Value << jd.total_probability();
    for (const Quantity q : kQuantities) {
      const auto atoms = binned_distribution(jd, q);
      y << YAML::Key << value_kind(q) << YAML::Value << YAML::BeginSeq;
      for (const auto& a : atoms) {
        y << YAML::Flow << YAML::BeginSeq << a.value << a.probability << YAML::EndSeq;
        distribution += value_kind(q) + "," + num(a.value) + "," + num(a.probability) + "\n";
      }
      y << YAML::EndSeq;
    }
    y << YAML::Key << "pairs" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "columns" << YAML::Value << YAML::Flow
      << std::vector<std::string>{"n", "m", "probability", "sigma", "heat_A", "heat_B"};
    y << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : jd.entries) {
      y << YAML::Flow << YAML::BeginSeq << e.n << e.m << e.probability << e.sigma << e.heat_a
        << e.heat_b << YAML::EndSeq;
    }
    y << YAML::EndSeq << YAML::EndMap;
    y << YAML::EndMap;

    y << YAML::Key << "reports" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : reports) emit_report(y, r);
    y << YAML::EndSeq;

    y << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "assumptions" << YAML::Value;
    emit_assumptions(y, assumptions);
    y << YAML::Key << "energy_commutator_norm" << YAML::Value << run.system.conservation.energy_norm;
    y << YAML::Key << "unitarity_residual" << YAML::Value << run.evolution.unitarity_residual;
    y << YAML::Key << "symmetry_residual" << YAML::Value << run.evolution.symmetry_residual;
    y << YAML::Key << "stochasticity_residual" << YAML::Value
      << stochasticity_residual(run.transitions);
    y << YAML::Key << "min_population_A" << YAML::Value << run.state_a.min_population;
    y << YAML::Key << "min_population_B" << YAML::Value << run.state_b.min_population;
    for (const auto& r : reports) {
      for (const auto& [k, v] : r.diagnostics) {
        if (k.rfind("clamped", 0) == 0) {
          y << YAML::Key << r.name + "." + k << YAML::Value << v;
        }
      }
    }
    y << YAML::EndMap;
    y << YAML::EndMap;

    std::string report_csv = "check,max_error,tolerance,passed\n";
    bool all_passed = true;
    for (const auto& r : reports) {
      report_csv += csv_field(r.name) + "," + num(r.max_error) + "," + num(r.tolerance) + "," +
                    (r.passed ? "true" : "false") + "\n";
      all_passed = all_passed && r.passed;
    }

    const fs::path dir = output_dir(config, options, path);
    {
      RunDirectory rd(dir);
      rd.write("config.yaml", dump_config(config));
      rd.write("result.yaml", std::string(y.c_str()) + "\n");
      rd.write("distribution.csv", distribution);
      rd.write("report.csv", report_csv);
    }

    print_reports(out, reports);
    out << "results written to " << dir.string() << "\n";
    if (!all_passed) {
      for (const auto& r : reports) {
        if (!r.passed) {
          err << path << ": check " << r.name << " failed: max_error " << num(r.max_error)
              << " > tolerance " << num(r.tolerance) << "\n";
        }
      }
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

int cmd_scan(const std::string& path, const RunOptions& options, std::ostream& out,
             std::ostream& err) {
  return guarded(path, err, [&] {
    ExperimentConfig config = load(path, options);
    if (config.g_list.empty() && config.tau_list.empty()) {
      throw ConfigError("scan needs 'coupling.g_list' or 'tau_list'");
    }
    const ProtocolInput base = resolve_input(config);
    const ScanReport scan = coupling_scan(base, config.g_list, config.tau_list);

    std::string csv =
        "g,tau,mean_abs_heat_minus_sigma,ft_residual_sigma,ft_residual_heat,"
        "sigma_identity_residual\n";
    YAML::Emitter y;
    y.SetDoublePrecision(17);
    y << YAML::BeginMap;
    emit_header(y, "scan", config);
    y << YAML::Key << "resolved" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "A" << YAML::Value;
    emit_theta(y, base.spec_a, base.temps_a);
    y << YAML::Key << "B" << YAML::Value;
    emit_theta(y, base.spec_b, base.temps_b);
    y << YAML::EndMap;
    y << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : scan.rows) {
      y << YAML::Flow << YAML::BeginMap << YAML::Key << "g" << YAML::Value << r.g << YAML::Key
        << "tau" << YAML::Value << r.tau << YAML::Key << "mean_abs_heat_minus_sigma"
        << YAML::Value << r.mean_heat_deviation << YAML::Key << "max_abs_heat_minus_sigma"
        << YAML::Value << r.max_heat_deviation << YAML::Key << "ft_residual_sigma" << YAML::Value
        << r.ft_residual_sigma << YAML::Key << "ft_residual_heat" << YAML::Value
        << r.ft_residual_heat << YAML::Key << "sigma_identity_residual" << YAML::Value
        << r.sigma_identity_residual << YAML::EndMap;
      csv += num(r.g) + "," + num(r.tau) + "," + num(r.mean_heat_deviation) + "," +
             num(r.ft_residual_sigma) + "," + num(r.ft_residual_heat) + "," +
             num(r.sigma_identity_residual) + "\n";
    }
    y << YAML::EndSeq;
    y << YAML::Key << "sigma_identities_passed" << YAML::Value << scan.sigma_identities_passed;
    y << YAML::Key << "heat_deviation_decreasing" << YAML::Value << scan.heat_deviation_decreasing;
    y << YAML::Key << "passed" << YAML::Value << scan.passed();
    y << YAML::EndMap;

    const fs::path dir = output_dir(config, options, path);
    {
      RunDirectory rd(dir);
      rd.write("config.yaml", dump_config(config));
      rd.write("result.yaml", std::string(y.c_str()) + "\n");
      rd.write("scan.csv", csv);
    }

    char line[200];
    std::snprintf(line, sizeof line, "%12s %12s %24s %24s\n", "g", "tau", "mean|heat-sigma|",
                  "sigma_identity_residual");
    out << line;
    for (const auto& r : scan.rows) {
      std::snprintf(line, sizeof line, "%12.6g %12.6g %24.17g %24.17g\n", r.g, r.tau,
                    r.mean_heat_deviation, r.sigma_identity_residual);
      out << line;
    }
    out << "results written to " << dir.string() << "\n";
    if (!scan.passed()) {
      if (!scan.sigma_identities_passed) err << path << ": sigma identities failed on the grid\n";
      if (!scan.heat_deviation_decreasing) {
        err << path << ": heat deviation does not decrease along g_list\n";
      }
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

int cmd_verify(const std::string& path, const RunOptions& options, std::ostream& out,
               std::ostream& err) {
  return guarded(path, err, [&] {
    const ExperimentConfig config = load(path, options);
    const auto [spec_a, spec_b] = build_specs(config, false);
    std::vector<AssumptionCheck> rows;
    try {
      const CompositeSystem cs = build_composite(
          spec_a, spec_b, build_coupling(config, spec_a, spec_b),
          config.g.value_or(config.g_list.empty() ? 0.0 : config.g_list.front()), config.dim_cap);
      rows = assumption_rows(cs);
    } catch (const ContractError& e) {
      for (const auto& side : {verify_assumptions(spec_a), verify_assumptions(spec_b)}) {
        rows.insert(rows.end(), side.checks.begin(), side.checks.end());
      }
      rows.push_back({std::string("coupling: ") + e.what(), 1.0, 0.0, false});
    }

    auto feasibility = [&](const SystemSpec& spec, const TemperatureConfig& t,
                           const std::string& side) {
      const auto own = verify_assumptions(spec);
      if (!own.passed()) {
        rows.push_back({side + ": fit skipped, generators do not commute", 1.0, 0.0, false});
        return;
      }
      try {
        RVector targets;
        GeneralizedTemperatures theta0 = GeneralizedTemperatures::zeros(spec);
        if (t.targets) {
          targets = Eigen::Map<const RVector>(t.targets->data(),
                                              static_cast<Eigen::Index>(t.targets->size()));
          if (t.theta0) {
            theta0.values = Eigen::Map<const RVector>(t.theta0->data(),
                                                      static_cast<Eigen::Index>(t.theta0->size()));
          }
        } else {
          const auto given = GeneralizedTemperatures::for_spec(
              spec, Eigen::Map<const RVector>(t.theta->data(),
                                              static_cast<Eigen::Index>(t.theta->size())));
          targets = moments(gge_state(spec, given));
        }
        const double margin = moment_polytope_margin(outcome_table(spec).tuples, targets);
        rows.push_back({side + ": moment polytope margin", margin, kMinPolytopeMargin,
                        margin > kMinPolytopeMargin});
        const FitOptions fit_options;
        const FitResult fit = fit_temperatures(spec, MomentTargets{targets}, theta0, fit_options);
        rows.push_back({side + ": fit round trip residual", fit.residual, fit_options.tol,
                        fit.residual <= fit_options.tol});
      } catch (const Error& e) {
        rows.push_back({side + ": " + e.what(), 1.0, 0.0, false});
      }
    };
    feasibility(spec_a, config.temps_a, "A");
    feasibility(spec_b, config.temps_b, "B");

    bool all_passed = true;
    char line[256];
    std::snprintf(line, sizeof line, "%-44s %24s %12s  %s\n", "assumption", "value", "tolerance",
                  "status");
    out << line;
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%-44s %24.17g %12.3g  %s\n", r.name.c_str(), r.value,
                    r.tolerance, r.passed ? "pass" : "FAIL");
      out << line;
      all_passed = all_passed && r.passed;
    }
    if (!all_passed) {
      for (const auto& r : rows) {
        if (!r.passed) err << path << ": " << r.name << " failed (value " << num(r.value) << ")\n";
      }
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

}  // namespace heatlab
