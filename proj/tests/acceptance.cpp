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

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/analysis.hpp"
#include "heatlab/config.hpp"
#include "heatlab/error.hpp"
#include "heatlab/gge.hpp"
#include "heatlab/protocol.hpp"
#include "support.hpp"

using namespace heatlab;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(HEATLAB_SOURCE_DIR) / "configs";

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ProtocolInput from_config(const std::string& name) {
  auto c = load_config((kConfigs / (name + ".yaml")).string());
  return resolve_input(c);
}

ProtocolInput energy_only_pair(std::size_t index, std::mt19937_64& rng) {
  ProtocolInput in = testing::random_pair(index, rng);
  in.spec_a.shared_charges.clear();
  in.spec_b.shared_charges.clear();
  in.temps_a = testing::random_theta(in.spec_a, rng, 1.5);
  in.temps_b = testing::random_theta(in.spec_b, rng, 1.5);
  return in;
}

/// The randomized configuration family: XX pairs with shared Mz and
/// tilted Ising pairs, joint dimensions 16 to 256.
const std::vector<ProtocolRun>& family() {
  static const std::vector<ProtocolRun> runs = [] {
    std::mt19937_64 rng(20240601);
    std::vector<ProtocolRun> out;
    for (std::size_t i = 0; i < 22; ++i) out.push_back(run_protocol(testing::random_pair(i, rng)));
    for (const bool ising : {false, true}) {
      ProtocolInput in;
      if (ising) {
        in.spec_a = build_tilted_ising_chain(4, 1.0, 0.9045, 0.809, Side::A);
        in.spec_b = build_tilted_ising_chain(4, 1.0, 0.7, 0.4, Side::B);
        in.coupling = coupling::Ising{};
      } else {
        in.spec_a = build_xx_chain(4, 1.0, 0.2, Side::A);
        in.spec_b = build_xx_chain(4, 0.8, -0.3, Side::B);
      }
      in.temps_a = testing::random_theta(in.spec_a, rng, 1.5);
      in.temps_b = testing::random_theta(in.spec_b, rng, 1.5);
      in.g = testing::uniform(rng, 0.0, 1.0);
      in.tau = testing::uniform(rng, 0.0, 10.0);
      out.push_back(run_protocol(in));
    }
    return out;
  }();
  return runs;
}

using RunCheck = std::function<VerificationReport(const ProtocolRun&)>;

/// Worst error of `check` over `runs`; passes iff every report passes.
Verdict over(const std::vector<ProtocolRun>& runs, const RunCheck& check, const std::string& what) {
  double worst = 0.0;
  double tol = 0.0;
  std::size_t failed = 0;
  for (const auto& run : runs) {
    const auto r = check(run);
    worst = std::max(worst, r.max_error);
    tol = r.tolerance;
    if (!r.passed) ++failed;
  }
  return {failed == 0, std::to_string(runs.size()) + " configs, worst " + what + " " + sci(worst) +
                           " (tol " + sci(tol) + ")" +
                           (failed ? ", " + std::to_string(failed) + " failing" : "")};
}

Verdict criterion_integral(const std::vector<ProtocolRun>& runs) {
  return over(runs, [](const ProtocolRun& r) { return integral_ft(r.distribution); },
              "|<exp(-sigma)> - 1|");
}

Verdict criterion_detailed(const std::vector<ProtocolRun>& runs) {
  return over(runs, [](const ProtocolRun& r) { return detailed_ft_check(r.distribution, 1e-14, 1e-8); },
              "pairwise residual");
}

Verdict criterion_renyi(const std::vector<ProtocolRun>& runs, std::size_t min_full_grid) {
  // Configs whose rho0 exceeds the condition ceiling are held to the
  // guard-free part of the grid, 0 <= z <= 1.
  std::vector<double> safe;
  for (const double z : kDefaultZGrid) {
    if (z >= 0.0 && z <= 1.0) safe.push_back(z);
  }
  double kappa_max = 0.0;
  double guarded_kappa = 0.0;
  int guarded = 0;
  auto v = over(
      runs,
      [&](const ProtocolRun& r) {
        try {
          auto rep = renyi_identity_check(r.distribution, r.rho0, r.rho_tau, kDefaultZGrid, 1e-7);
          for (const auto& [k, val] : rep.diagnostics) {
            if (k == "condition_rho0") kappa_max = std::max(kappa_max, val);
          }
          return rep;
        } catch (const ConditioningError&) {
          ++guarded;
          auto rep = renyi_identity_check(r.distribution, r.rho0, r.rho_tau, safe, 1e-7);
          for (const auto& [k, val] : rep.diagnostics) {
            if (k == "condition_rho0") guarded_kappa = std::max(guarded_kappa, val);
          }
          return rep;
        }
      },
      "relative error");
  v.detail += ", max condition on the full grid " + sci(kappa_max);
  if (guarded > 0) {
    v.detail += "; " + std::to_string(guarded) + " config(s) above the 1e12 guard (condition " +
                sci(guarded_kappa) + ") checked on 0 <= z <= 1 only";
  }
  v.passed = v.passed && kappa_max <= kMaxCondition &&
             runs.size() - static_cast<std::size_t>(guarded) >= min_full_grid;
  return v;
}

Verdict criterion_mean(const std::vector<ProtocolRun>& runs) {
  double min_d = INFINITY;
  auto v = over(
      runs,
      [&min_d](const ProtocolRun& r) {
        auto rep = mean_heat_check(r.distribution, r.rho0, r.rho_tau, 1e-8);
        min_d = std::min(min_d, rep.rhs[0].real());
        return rep;
      },
      "|<sigma> - D|");
  v.detail += ", min D " + sci(min_d);
  v.passed = v.passed && min_d >= -1e-10;
  return v;
}

Verdict criterion_moments(const std::vector<ProtocolRun>& runs) {
  return over(runs,
              [](const ProtocolRun& r) {
                auto rep = ordered_moment_check(r.distribution, r.rho0, r.rho_tau, 4, 1e-7);
                // n = 1 is the mean-heat criterion; keep n = 2, 3, 4.
                VerificationReport high = rep;
                high.max_error = 0.0;
                for (std::size_t i = 0; i < rep.grid.size(); ++i) {
                  if (rep.grid[i] < 2) continue;
                  const double scale = std::max(1.0, std::abs(rep.lhs[i]));
                  high.max_error = std::max(high.max_error, std::abs(rep.lhs[i] - rep.rhs[i]) / scale);
                }
                high.passed = high.max_error <= 1e-7;
                return high;
              },
              "relative error (n = 2..4)");
}

Verdict criterion_characteristic(const std::vector<ProtocolRun>& runs) {
  return over(runs,
              [](const ProtocolRun& r) {
                return characteristic_function_check(r.distribution, r.exponent,
                                                     r.evolution.unitary, kDefaultUGrid, 1e-8);
              },
              "|G(u) - trace formula|");
}

Verdict criterion_weak_coupling() {
  const auto base = from_config("xx_pair_small");
  ProtocolInput in = base;
  in.tau = 2.0;
  const auto scan = coupling_scan(in, {1.0, 0.3, 0.1, 0.03});
  double worst_sigma = 0.0;
  std::string series;
  for (const auto& row : scan.rows) {
    worst_sigma = std::max(worst_sigma, row.sigma_identity_residual);
    series += (series.empty() ? "" : " ") + sci(row.mean_heat_deviation);
  }
  const double last = scan.rows.back().mean_heat_deviation;
  const bool ok = scan.heat_deviation_decreasing && last < 1e-2 && worst_sigma <= 1e-8 &&
                  scan.sigma_identities_passed;
  return {ok, "mean |heat_A - sigma| over g = 1, 0.3, 0.1, 0.03: " + series +
                  "; sigma identity residual " + sci(worst_sigma)};
}

Verdict criterion_reduction() {
  std::mt19937_64 rng(8);
  std::vector<ProtocolRun> runs;
  for (std::size_t i = 0; i < 8; ++i) runs.push_back(run_protocol(energy_only_pair(i, rng)));
  runs.push_back(run_protocol(from_config("ising_pair_chaotic")));
  const auto jw = over(runs, [](const ProtocolRun& r) { return jarzynski_wojcik_reduction(r); },
                       "heat_A vs delta_beta * delta_E_A");
  bool others = true;
  for (const auto& run : runs) {
    others = others && integral_ft(run.distribution).passed &&
             detailed_ft_check(run.distribution).passed &&
             renyi_identity_check(run.distribution, run.rho0, run.rho_tau).passed &&
             mean_heat_check(run.distribution, run.rho0, run.rho_tau).passed;
  }
  return {jw.passed && others,
          jw.detail + (others ? "; integral, detailed, Renyi and mean-heat checks pass"
                              : "; an exact identity failed")};
}

Verdict criterion_fitting() {
  std::vector<SystemSpec> specs{
      build_xx_chain(2, 1.0, 0.3, Side::A), build_xx_chain(3, 0.8, -0.2, Side::B),
      build_tilted_ising_chain(3, 1.0, 0.9, 0.5, Side::A),
      add_exclusive_charge(build_xx_chain(2, 1.0, 0.25, Side::A), "J",
                           pauli::parse_sum("Z[0] Z[1]", 2)),
      add_exclusive_charge(build_xx_chain(3, 1.0, 0.1, Side::B), "P",
                           pauli::parse_sum("Z[0] Z[1] Z[2]", 3))};
  std::mt19937_64 rng(99);
  int worst_iter = 0;
  double worst_res = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto& spec = specs[static_cast<std::size_t>(trial) % specs.size()];
    const auto truth = testing::random_theta(spec, rng, 1.0);
    const RVector targets = moments(gge_state(spec, truth));
    try {
      FitOptions options;
      options.max_iter = 50;
      const auto fit = fit_temperatures(spec, MomentTargets{targets},
                                        GeneralizedTemperatures::zeros(spec), options);
      const double res =
          (moments(gge_state(spec, fit.theta)) - targets).cwiseAbs().maxCoeff();
      worst_iter = std::max(worst_iter, fit.iterations);
      worst_res = std::max(worst_res, res);
      if (res > 1e-10 || fit.iterations > 50) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }

  int rejected = 0;
  const auto q = build_custom_system(1, pauli::z(), Side::A);
  RVector edge(1);
  edge << -1.0;
  const auto start = std::chrono::steady_clock::now();
  try {
    fit_temperatures(q, MomentTargets{edge}, GeneralizedTemperatures::zeros(q));
  } catch (const InfeasibleTargetError&) {
    ++rejected;
  }
  const auto xx = build_xx_chain(2, 1.0, 0.3, Side::A);
  const auto table = outcome_table(xx);
  Eigen::Index lowest = 0;
  table.tuples.col(0).minCoeff(&lowest);
  try {
    fit_temperatures(xx, MomentTargets{RVector(table.tuples.row(lowest).transpose())},
                     GeneralizedTemperatures::zeros(xx));
  } catch (const InfeasibleTargetError&) {
    ++rejected;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && rejected == 2,
          "50 round trips, worst residual " + sci(worst_res) + " in at most " +
              std::to_string(worst_iter) + " iterations; " + std::to_string(rejected) +
              "/2 boundary targets rejected in " + sci(seconds) + " s"};
}

std::string fingerprint(const JointDistribution& jd) {
  std::ostringstream out;
  for (const auto& e : jd.entries) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%a\n", e.n, e.m, e.probability);
    out << buf;
  }
  return out.str();
}

Verdict criterion_sampling() {
  const auto run = run_protocol(from_config("xx_pair_small"));
  const std::uint64_t seed = 424242;
  const auto first = sample_protocol(run, 100000, seed);
  const auto again = sample_protocol(run, 100000, seed);
  const auto threaded = sample_protocol(run, 100000, seed, 4);
  const auto rep = sampling_consistency(first, run.distribution);
  const bool identical = fingerprint(first) == fingerprint(again) &&
                         fingerprint(first) == fingerprint(threaded);
  std::string detail = "1e5 samples, worst deviation " + sci(rep.max_error) +
                       " in units of 4 standard errors";
  detail += identical ? "; reruns byte-identical" : "; reruns differ";
  return {rep.passed && identical, detail};
}

Verdict criterion_chaotic() {
  const std::vector<ProtocolRun> runs{run_protocol(from_config("ising_pair_chaotic"))};
  const Verdict parts[] = {criterion_integral(runs), criterion_detailed(runs),
                           criterion_renyi(runs, 1), criterion_mean(runs),
                           criterion_moments(runs),  criterion_characteristic(runs)};
  bool ok = true;
  std::string failing;
  for (int i = 0; i < 6; ++i) {
    ok = ok && parts[i].passed;
    if (!parts[i].passed) failing += " " + std::to_string(i + 1);
  }
  return {ok, ok ? "criteria 1-6 pass on ising_pair_chaotic" : "failing:" + failing};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "integral fluctuation theorem", [] { return criterion_integral(family()); }},
      {2, "detailed exchange fluctuation theorem", [] { return criterion_detailed(family()); }},
      {3, "Renyi identity", [] { return criterion_renyi(family(), 20); }},
      {4, "mean heat equals relative entropy", [] { return criterion_mean(family()); }},
      {5, "ordered moments", [] { return criterion_moments(family()); }},
      {6, "characteristic function", [] { return criterion_characteristic(family()); }},
      {7, "weak-coupling limit", criterion_weak_coupling},
      {8, "energy-only reduction", criterion_reduction},
      {9, "GGE fitting", criterion_fitting},
      {10, "Monte Carlo consistency", criterion_sampling},
      {11, "integrable and chaotic regimes", criterion_chaotic},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %2d  %-38s %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", c.id, c.title,
                v.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!v.passed) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
