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

#include "heatlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatlab/error.hpp"

namespace heatlab {

namespace {

void require_enumerated(const JointDistribution& jd, const char* check) {
  if (jd.sampled) {
    throw ContractError(std::string(check) + " needs an enumerated distribution");
  }
}

void finish(VerificationReport& r) { r.passed = r.max_error <= r.tolerance; }

double trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

Complex trace_product_c(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum();
}

// Density matrix spectrum with the relative clamp applied.
struct ClampedSpectrum {
  EigenSystem es;
  int clamped = 0;
  double condition = 1.0;
};

ClampedSpectrum clamped_spectrum(const OperatorMatrix& rho) {
  ClampedSpectrum out{eigh(rho)};
  auto& l = out.es.eigenvalues;
  const double top = l.maxCoeff();
  if (!(top > 0.0)) throw DomainError("density matrix has no positive eigenvalue");
  const double floor = kClampFloor * top;
  for (auto& v : l) {
    if (v < floor) {
      v = floor;
      ++out.clamped;
    }
  }
  out.condition = top / l.minCoeff();
  return out;
}

CMatrix spectral_power(const ClampedSpectrum& s, double a) {
  if (a == 0.0) {
    const auto d = s.es.eigenvectors.rows();
    return CMatrix::Identity(d, d);
  }
  return s.es.apply([a](double l) { return Complex(std::pow(l, a), 0.0); });
}

CMatrix spectral_log(const ClampedSpectrum& s) {
  return s.es.apply([](double l) { return Complex(std::log(l), 0.0); });
}

double renyi_trace(const ClampedSpectrum& s0, const ClampedSpectrum& st, double z) {
  if ((z < 0.0 || z > 1.0) && s0.condition > kMaxCondition) {
    throw ConditioningError("rho0 condition number " + std::to_string(s0.condition) +
                            " exceeds 1e12 for z = " + std::to_string(z) +
                            "; reduce the generalized temperatures");
  }
  return trace_product(spectral_power(st, 1.0 - z), spectral_power(s0, z));
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

VerificationReport integral_ft(const JointDistribution& jd, Quantity q, double tolerance) {
  VerificationReport r;
  r.name = "integral_ft[" + quantity_name(q) + "]";
  double mean = 0.0;
  double second = 0.0;
  for (const auto& e : jd.entries) {
    const double x = std::exp(-e.value(q));
    mean += e.probability * x;
    second += e.probability * x * x;
  }
  r.lhs = {mean};
  r.rhs = {1.0};
  r.max_error = std::abs(mean - 1.0);
  if (jd.sampled) {
    r.statistical = true;
    const double var = std::max(0.0, second - mean * mean);
    r.standard_error = std::sqrt(var / static_cast<double>(jd.sample_count));
    r.tolerance = 4.0 * r.standard_error;
  } else {
    r.tolerance = tolerance;
  }
  finish(r);
  return r;
}

VerificationReport detailed_ft_check(const JointDistribution& jd, double min_probability,
                                     double tolerance) {
  require_enumerated(jd, "detailed_ft_check");
  VerificationReport r;
  r.name = "detailed_ft[sigma]";
  r.tolerance = tolerance;
  std::size_t checked = 0;
  for (const auto& e : jd.entries) {
    if (e.probability <= min_probability) continue;
    const std::size_t rev = jd.find(e.m, e.n);
    if (rev == jd.entries.size()) {
      r.max_error = std::max(r.max_error, std::abs(e.sigma) + 1.0);
      continue;
    }
    const double residual =
        std::log(e.probability) - std::log(jd.entries[rev].probability) - e.sigma;
    r.max_error = std::max(r.max_error, std::abs(residual));
    ++checked;
  }
  r.diagnostics.emplace_back("pairs_checked", static_cast<double>(checked));
  finish(r);
  return r;
}

VerificationReport distribution_ft_check(const JointDistribution& jd, Quantity q,
                                         double min_probability, double tolerance) {
  VerificationReport r;
  r.name = "distribution_ft[" + quantity_name(q) + "]";
  r.grid_label = "value";
  r.relative = true;
  r.tolerance = tolerance;
  const auto atoms = binned_distribution(jd, q);
  double scale = 1.0;
  for (const auto& a : atoms) scale = std::max(scale, std::abs(a.value));
  const double eps = 1e-9 * scale;
  for (const auto& a : atoms) {
    const auto it = std::lower_bound(atoms.begin(), atoms.end(), -a.value - eps,
                                     [](const Atom& x, double v) { return x.value < v; });
    const bool found = it != atoms.end() && std::abs(it->value + a.value) <= eps;
    if (!found || it->probability <= min_probability) continue;
    const double ratio = a.probability / it->probability;
    r.grid.push_back(a.value);
    r.lhs.emplace_back(ratio);
    r.rhs.emplace_back(std::exp(a.value));
    r.max_error = std::max(r.max_error, std::abs(ratio - std::exp(a.value)) / std::exp(a.value));
  }
  finish(r);
  return r;
}

double renyi_divergence(const OperatorMatrix& rho0, const OperatorMatrix& rho_tau, double z) {
  if (z == 1.0) {
    throw ContractError("renyi_divergence is singular at z = 1; use relative_entropy");
  }
  if (rho0.dim() != rho_tau.dim()) throw DimensionError("density matrices differ in dimension");
  const double tr = renyi_trace(clamped_spectrum(rho0), clamped_spectrum(rho_tau), z);
  if (!(tr > 0.0)) {
    throw DomainError("Tr[rho0^z rho_tau^(1-z)] = " + std::to_string(tr) + " is not positive");
  }
  return std::log(tr) / (z - 1.0);
}

double relative_entropy(const OperatorMatrix& rho_a, const OperatorMatrix& rho_b) {
  if (rho_a.dim() != rho_b.dim()) throw DimensionError("density matrices differ in dimension");
  const EigenSystem ea = eigh(rho_a);
  double entropy_term = 0.0;  // Tr[rho_a ln rho_a], with 0 ln 0 = 0
  for (const double l : ea.eigenvalues) {
    if (l > 0.0) entropy_term += l * std::log(l);
  }
  const ClampedSpectrum sb = clamped_spectrum(rho_b);
  if (sb.clamped > 0) {
    // Weight of rho_a on the clamped part of rho_b's spectrum.
    const double floor = sb.es.eigenvalues.minCoeff();
    double leaked = 0.0;
    for (Eigen::Index i = 0; i < sb.es.eigenvalues.size(); ++i) {
      if (sb.es.eigenvalues(i) <= floor) {
        const auto v = sb.es.eigenvectors.col(i);
        leaked += (v.adjoint() * rho_a.entries() * v)(0, 0).real();
      }
    }
    if (leaked > 1e-14) {
      throw DomainError("rho_b is rank deficient on the support of rho_a (weight " +
                        std::to_string(leaked) + ")");
    }
  }
  return entropy_term - trace_product(rho_a.entries(), spectral_log(sb));
}

VerificationReport renyi_identity_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                        const OperatorMatrix& rho_tau,
                                        const std::vector<double>& z_grid, double tolerance) {
  require_enumerated(jd, "renyi_identity_check");
  VerificationReport r;
  r.name = "renyi_identity";
  r.grid_label = "z";
  r.relative = true;
  r.tolerance = tolerance;
  const ClampedSpectrum s0 = clamped_spectrum(rho0);
  const ClampedSpectrum st = clamped_spectrum(rho_tau);
  for (const double z : z_grid) {
    if (z == 1.0) throw ContractError("z = 1 belongs to mean_heat_check, not the Renyi grid");
    double lhs = 0.0;
    for (const auto& e : jd.entries) lhs += e.probability * std::exp(-z * e.sigma);
    const double rhs = renyi_trace(s0, st, z);
    r.grid.push_back(z);
    r.lhs.emplace_back(lhs);
    r.rhs.emplace_back(rhs);
    r.max_error = std::max(r.max_error, std::abs(lhs - rhs) / std::abs(rhs));
  }
  r.diagnostics.emplace_back("condition_rho0", s0.condition);
  r.diagnostics.emplace_back("clamped_rho0", s0.clamped);
  finish(r);
  return r;
}

VerificationReport mean_heat_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                   const OperatorMatrix& rho_tau, double tolerance) {
  require_enumerated(jd, "mean_heat_check");
  VerificationReport r;
  r.name = "mean_heat";
  r.tolerance = tolerance;
  double mean = 0.0;
  for (const auto& e : jd.entries) mean += e.probability * e.sigma;
  const double d = relative_entropy(rho_tau, rho0);
  r.lhs = {mean};
  r.rhs = {d};
  r.max_error = std::abs(mean - d);
  r.diagnostics.emplace_back("relative_entropy", d);
  finish(r);
  if (d < -1e-10 || mean < -1e-10) r.passed = false;
  return r;
}

VerificationReport ordered_moment_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                        const OperatorMatrix& rho_tau, int n_max,
                                        double tolerance) {
  require_enumerated(jd, "ordered_moment_check");
  VerificationReport r;
  r.name = "ordered_moments";
  r.grid_label = "n";
  r.relative = true;
  r.tolerance = tolerance;
  const CMatrix log0 = spectral_log(clamped_spectrum(rho0));
  const CMatrix logt = spectral_log(clamped_spectrum(rho_tau));
  const auto d = log0.rows();

  // left[k] = rho_tau (ln rho_tau)^k, right[j] = (ln rho0)^j
  std::vector<CMatrix> left{rho_tau.entries()};
  std::vector<CMatrix> right{CMatrix::Identity(d, d)};
  for (int k = 1; k <= n_max; ++k) {
    left.push_back(left.back() * logt);
    right.push_back(right.back() * log0);
  }
  for (int n = 1; n <= n_max; ++n) {
    double lhs = 0.0;
    for (const auto& e : jd.entries) lhs += e.probability * std::pow(e.sigma, n);
    double rhs = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double sign = (n - k) % 2 == 0 ? 1.0 : -1.0;
      rhs += binomial(n, k) * sign * trace_product(left[static_cast<std::size_t>(k)],
                                                   right[static_cast<std::size_t>(n - k)]);
    }
    r.grid.push_back(n);
    r.lhs.emplace_back(lhs);
    r.rhs.emplace_back(rhs);
    r.max_error = std::max(r.max_error, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  finish(r);
  return r;
}

VerificationReport characteristic_function_check(const JointDistribution& jd,
                                                 const OperatorMatrix& exponent,
                                                 const CMatrix& unitary,
                                                 const std::vector<double>& u_grid,
                                                 double tolerance) {
  require_enumerated(jd, "characteristic_function_check");
  VerificationReport r;
  r.name = "characteristic_function";
  r.grid_label = "u";
  r.tolerance = tolerance;
  const EigenSystem es = eigh(exponent);
  const double shift = es.eigenvalues.minCoeff();
  const CMatrix boltz = es.apply([shift](double l) { return Complex(std::exp(-(l - shift)), 0.0); });
  double z = 0.0;
  for (const double l : es.eigenvalues) z += std::exp(-(l - shift));
  const CMatrix udag = unitary.adjoint();
  double alt_error = 0.0;
  for (const double u : u_grid) {
    Complex lhs = 0.0;
    for (const auto& e : jd.entries) lhs += e.probability * std::exp(Complex(0.0, u * e.sigma));
    const CMatrix fwd = es.apply([u](double l) { return std::exp(Complex(0.0, u * l)); });
    const CMatrix bwd = fwd.adjoint();
    const Complex rhs = trace_product_c(boltz * bwd * udag, fwd * unitary) / z;
    const Complex alt = trace_product_c(boltz * fwd * udag, bwd * unitary) / z;
    r.grid.push_back(u);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    r.max_error = std::max(r.max_error, std::abs(lhs - rhs));
    alt_error = std::max(alt_error, std::abs(lhs - alt));
  }
  r.diagnostics.emplace_back("alternate_ordering_max_error", alt_error);
  finish(r);
  return r;
}

VerificationReport sampling_consistency(const JointDistribution& sampled,
                                        const JointDistribution& exact) {
  if (!sampled.sampled || exact.sampled) {
    throw ContractError("sampling_consistency expects (sampled, enumerated) distributions");
  }
  VerificationReport r;
  r.name = "sampling_consistency";
  r.grid_label = "statistic";
  r.relative = true;  // errors are in units of the 4-sigma bound
  r.statistical = true;
  r.tolerance = 1.0;
  const double count = static_cast<double>(sampled.sample_count);
  auto moments = [](const JointDistribution& jd, auto f) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& e : jd.entries) {
      const double x = f(e.sigma);
      m1 += e.probability * x;
      m2 += e.probability * x * x;
    }
    return std::pair{m1, m2};
  };
  auto compare = [&](double index, auto f, const char* label) {
    const auto [est, est2] = moments(sampled, f);
    const auto [ref, ref2] = moments(exact, f);
    // Standard error from the exact variance; the sampled one can vanish
    // when rare outcomes were never drawn.
    const double se = std::sqrt(std::max(0.0, ref2 - ref * ref) / count);
    const double err = std::abs(est - ref);
    const double normalized = se > 0.0 ? err / (4.0 * se) : (err == 0.0 ? 0.0 : INFINITY);
    r.grid.push_back(index);
    r.lhs.emplace_back(est);
    r.rhs.emplace_back(ref);
    r.max_error = std::max(r.max_error, normalized);
    r.standard_error = std::max(r.standard_error, se);
    r.diagnostics.emplace_back(std::string(label) + "_standard_error", se);
  };
  compare(0, [](double s) { return s; }, "mean_sigma");
  compare(1, [](double s) { return std::exp(-s); }, "mean_exp_minus_sigma");
  finish(r);
  return r;
}

std::pair<double, double> heat_deviation(const JointDistribution& jd, Quantity q) {
  double mean = 0.0;
  double worst = 0.0;
  for (const auto& e : jd.entries) {
    const double dev = std::abs(e.value(q) - e.sigma);
    mean += e.probability * dev;
    if (e.probability > 1e-14) worst = std::max(worst, dev);
  }
  return {mean, worst};
}

std::vector<VerificationReport> standard_checks(const ProtocolRun& run,
                                                const std::vector<double>& z_grid,
                                                const std::vector<double>& u_grid) {
  const auto& jd = run.distribution;
  return {integral_ft(jd),
          detailed_ft_check(jd),
          distribution_ft_check(jd),
          renyi_identity_check(jd, run.rho0, run.rho_tau, z_grid),
          mean_heat_check(jd, run.rho0, run.rho_tau),
          ordered_moment_check(jd, run.rho0, run.rho_tau),
          characteristic_function_check(jd, run.exponent, run.evolution.unitary, u_grid)};
}

ScanReport coupling_scan(const ProtocolInput& base, const std::vector<double>& g_values,
                         const std::vector<double>& tau_values) {
  ScanReport report;
  report.sigma_identities_passed = true;
  report.heat_deviation_decreasing = true;
  auto point = [&](double g, double tau) {
    ProtocolInput in = base;
    in.g = g;
    in.tau = tau;
    const ProtocolRun run = run_protocol(in);
    const auto& jd = run.distribution;
    ScanRow row;
    row.g = g;
    row.tau = tau;
    std::tie(row.mean_heat_deviation, row.max_heat_deviation) = heat_deviation(jd);
    row.ft_residual_sigma = std::abs(integral_ft(jd).lhs[0].real() - 1.0);
    row.ft_residual_heat = std::abs(integral_ft(jd, Quantity::heat_a).lhs[0].real() - 1.0);
    const auto checks = std::vector<VerificationReport>{
        integral_ft(jd), detailed_ft_check(jd),
        renyi_identity_check(jd, run.rho0, run.rho_tau),
        mean_heat_check(jd, run.rho0, run.rho_tau)};
    for (const auto& c : checks) {
      row.sigma_identity_residual = std::max(row.sigma_identity_residual, c.max_error);
      report.sigma_identities_passed = report.sigma_identities_passed && c.passed;
    }
    report.rows.push_back(row);
  };
  for (const double g : g_values) point(g, base.tau);
  for (const double tau : tau_values) point(base.g, tau);

  // Deviation must shrink along the (descending) g list, up to 1.5x slack.
  for (std::size_t i = 1; i < g_values.size(); ++i) {
    if (report.rows[i].mean_heat_deviation > 1.5 * report.rows[i - 1].mean_heat_deviation) {
      report.heat_deviation_decreasing = false;
    }
  }
  return report;
}

VerificationReport jarzynski_wojcik_reduction(const ProtocolRun& run) {
  const auto& a = run.state_a.spec;
  const auto& b = run.state_b.spec;
  if (a.generator_count() != 1 || b.generator_count() != 1) {
    throw ContractError("jarzynski_wojcik_reduction needs energy-only generator lists");
  }
  const auto& jd = run.distribution;
  const double delta_beta = run.state_b.theta.values(0) - run.state_a.theta.values(0);
  const std::size_t db = run.table_b.size();
  VerificationReport r;
  r.name = "jarzynski_wojcik_reduction";
  r.tolerance = 1e-12;
  double heat_error = 0.0;
  for (const auto& e : jd.entries) {
    const double en = run.table_a.tuples(static_cast<Eigen::Index>(e.n / db), 0);
    const double em = run.table_a.tuples(static_cast<Eigen::Index>(e.m / db), 0);
    const double expected = delta_beta * (en - em);
    heat_error = std::max(heat_error, std::abs(e.heat_a - expected) / std::max(1.0, std::abs(expected)));
  }
  const VerificationReport ratio = distribution_ft_check(jd, Quantity::sigma);
  const auto [mean_dev, max_dev] = heat_deviation(jd);
  r.lhs = {heat_error};
  r.rhs = {0.0};
  r.max_error = heat_error;
  r.diagnostics.emplace_back("delta_beta", delta_beta);
  r.diagnostics.emplace_back("sigma_ratio_max_error", ratio.max_error);
  r.diagnostics.emplace_back("mean_abs_heat_a_minus_sigma", mean_dev);
  r.diagnostics.emplace_back("max_abs_heat_a_minus_sigma", max_dev);
  finish(r);
  r.passed = r.passed && ratio.passed;
  return r;
}

}  // namespace heatlab
