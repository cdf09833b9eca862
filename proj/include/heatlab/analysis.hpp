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

#include <string>
#include <utility>
#include <vector>

#include "heatlab/operator.hpp"
#include "heatlab/protocol.hpp"
#include "heatlab/tpm.hpp"

namespace heatlab {

/// Outcome of one identity check: lhs/rhs series on a grid, the worst
/// discrepancy, and the tolerance it was held to.
struct VerificationReport {
  std::string name;
  std::string grid_label;  // "z", "u", "n", ... or empty for scalar checks
  std::vector<double> grid;
  std::vector<Complex> lhs;
  std::vector<Complex> rhs;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool relative = false;
  bool passed = false;
  /// Monte Carlo checks pass iff |estimate - target| <= 4 standard errors.
  bool statistical = false;
  double standard_error = 0.0;
  std::vector<std::pair<std::string, double>> diagnostics;
};

inline const std::vector<double> kDefaultZGrid{-1.0, -0.5, 0.0, 0.5, 2.0, 3.0};
inline const std::vector<double> kDefaultUGrid{0.0, 0.3, 1.1, 2.7};

/// <exp(-q)> = 1, with q = sigma by default. heat_A/heat_B are diagnostics
/// whose deviation measures the weak-coupling approximation.
VerificationReport integral_ft(const JointDistribution& jd, Quantity q = Quantity::sigma,
                               double tolerance = 1e-8);

/// max |ln p_nm - ln p_mn - sigma_nm| over pairs with p_nm > min_probability.
VerificationReport detailed_ft_check(const JointDistribution& jd, double min_probability = 1e-14,
                                     double tolerance = 1e-8);

/// max |P(s)/P(-s) - e^s| / e^s over binned support points with
/// P(-s) > min_probability.
VerificationReport distribution_ft_check(const JointDistribution& jd,
                                         Quantity q = Quantity::sigma,
                                         double min_probability = 1e-12,
                                         double tolerance = 1e-6);

/// Condition-number ceiling for negative or >1 fractional powers.
inline constexpr double kMaxCondition = 1e12;

/// (1/(z-1)) ln Tr[rho0^z rho_tau^(1-z)]; z == 1 is rejected.
double renyi_divergence(const OperatorMatrix& rho0, const OperatorMatrix& rho_tau, double z);

/// Tr[rho_a (ln rho_a - ln rho_b)].
double relative_entropy(const OperatorMatrix& rho_a, const OperatorMatrix& rho_b);

/// <exp(-z sigma)> = Tr[rho_tau^(1-z) rho0^z] on each grid point.
VerificationReport renyi_identity_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                        const OperatorMatrix& rho_tau,
                                        const std::vector<double>& z_grid = kDefaultZGrid,
                                        double tolerance = 1e-7);

/// <sigma> = D(rho_tau || rho0).
VerificationReport mean_heat_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                   const OperatorMatrix& rho_tau, double tolerance = 1e-8);

/// <sigma^n> = sum_k C(n,k) (-1)^(n-k) Tr[rho_tau (ln rho_tau)^k (ln rho0)^(n-k)].
VerificationReport ordered_moment_check(const JointDistribution& jd, const OperatorMatrix& rho0,
                                        const OperatorMatrix& rho_tau, int n_max = 4,
                                        double tolerance = 1e-7);

/// G(u) = <exp(i u sigma)> against
/// Tr[e^{-h} e^{-iuh} U^dagger e^{iuh} U] / Tr[e^{-h}].
VerificationReport characteristic_function_check(const JointDistribution& jd,
                                                 const OperatorMatrix& exponent,
                                                 const CMatrix& unitary,
                                                 const std::vector<double>& u_grid = kDefaultUGrid,
                                                 double tolerance = 1e-8);

/// Sampled <sigma> and <exp(-sigma)> against their enumerated values,
/// each within 4 standard errors.
VerificationReport sampling_consistency(const JointDistribution& sampled,
                                        const JointDistribution& exact);

/// Probability-weighted mean and max of |q - sigma| over stored pairs.
std::pair<double, double> heat_deviation(const JointDistribution& jd, Quantity q = Quantity::heat_a);

struct ScanRow {
  double g = 0.0;
  double tau = 0.0;
  double mean_heat_deviation = 0.0;
  double max_heat_deviation = 0.0;
  double ft_residual_sigma = 0.0;
  double ft_residual_heat = 0.0;
  /// Worst residual across the exact sigma identities at this point.
  double sigma_identity_residual = 0.0;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  bool sigma_identities_passed = false;
  bool heat_deviation_decreasing = false;
  bool passed() const { return sigma_identities_passed && heat_deviation_decreasing; }
};

/// Re-runs the protocol at every g (then every tau) and tracks how far the
/// A-side heat drifts from the exact exponent change.
ScanReport coupling_scan(const ProtocolInput& base, const std::vector<double>& g_values,
                         const std::vector<double>& tau_values = {});

/// Checks a run whose generators are energies only: heat_A equals
/// delta_beta (E_n^A - E_m^A) pairwise to 1e-12, and sigma obeys the
/// distribution-level exchange relation.
VerificationReport jarzynski_wojcik_reduction(const ProtocolRun& run);

/// Every exact-identity check for an enumerated run, in a fixed order.
std::vector<VerificationReport> standard_checks(const ProtocolRun& run,
                                                const std::vector<double>& z_grid = kDefaultZGrid,
                                                const std::vector<double>& u_grid = kDefaultUGrid);

}  // namespace heatlab
