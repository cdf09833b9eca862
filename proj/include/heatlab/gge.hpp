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

#include <cstddef>
#include <vector>

#include "heatlab/models.hpp"
#include "heatlab/operator.hpp"

namespace heatlab {

/// Multipliers conjugate to (H, shared charges, exclusive charges), in
/// that order: (beta_0, beta_1..beta_M, lambda_1..) on A and
/// (beta_0, beta_1..beta_M, alpha_1..) on B.
struct GeneralizedTemperatures {
  RVector values;
  std::size_t n_shared = 0;
  std::size_t n_exclusive = 0;

  static GeneralizedTemperatures for_spec(const SystemSpec& spec, RVector values);
  static GeneralizedTemperatures zeros(const SystemSpec& spec);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// (beta_0, beta_1..beta_M): the entries paired across subsystems.
  RVector paired() const { return values.head(static_cast<Eigen::Index>(1 + n_shared)); }
  /// lambda (side A) or alpha (side B).
  RVector exclusive() const { return values.tail(static_cast<Eigen::Index>(n_exclusive)); }
};

/// Prescribed expectation values in generator order.
struct MomentTargets {
  RVector values;
};

/// Generalized Gibbs state exp(-sum theta_i O_i) / Z.
struct GGEState {
  SystemSpec spec;
  GeneralizedTemperatures theta;
  OperatorMatrix exponent = OperatorMatrix::identity(1);
  OperatorMatrix rho = OperatorMatrix::identity(1);
  double log_z = 0.0;
  EigenSystem exponent_spectrum;
  /// Smallest eigenvalue of rho; zero means the populations underflowed.
  double min_population = 0.0;
};

/// Magnitude of |theta_i| beyond which states are rejected as overflowing.
inline constexpr double kMaxTheta = 1e3;

/// Throws RangeError for non-finite or |theta| > kMaxTheta entries and
/// ContractError when the length does not match the spec.
GGEState gge_state(const SystemSpec& spec, const GeneralizedTemperatures& theta);

/// (Tr[rho H], Tr[rho I_1], ...) in generator order.
RVector moments(const GGEState& state);

/// C_jk = <O_j O_k> - <O_j><O_k>. For commuting generators this is minus
/// the Jacobian of moments() with respect to theta.
RMatrix covariance_matrix(const GGEState& state);

struct FitOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

struct FitResult {
  GeneralizedTemperatures theta;
  int iterations = 0;
  double residual = 0.0;
  /// Dual objective log Z(theta) + theta . targets after every accepted step,
  /// starting with the initial point.
  std::vector<double> objective;
};

/// Normalized interior margin of `target` in the convex hull of the rows of
/// `tuples`: n * max_w min_c w_c over convex weights reproducing the target.
/// Equals 1 at the uniform barycentre, is positive exactly in the relative
/// interior, and is -1 when the target is outside the hull.
double moment_polytope_margin(const RMatrix& tuples, const RVector& target);

/// Targets with a polytope margin at or below this are rejected.
inline constexpr double kMinPolytopeMargin = 1e-10;

/// Fits theta so that moments(gge_state(theta)) match the targets.
///
/// Damped Newton on the convex dual log Z(theta) + theta . targets with the
/// covariance matrix as Hessian (Tikhonov-regularized when cond > 1e12)
/// and Armijo backtracking. Targets outside the open moment polytope raise
/// InfeasibleTargetError before iterating; runaway |theta| or a failed line
/// search raise it during iteration. Exhausting max_iter raises
/// ConvergenceError carrying the residual.
FitResult fit_temperatures(const SystemSpec& spec, const MomentTargets& targets,
                           const GeneralizedTemperatures& theta0, const FitOptions& options = {});

/// rho_A (x) rho_B.
OperatorMatrix product_initial_state(const GGEState& a, const GGEState& b,
                                     std::size_t dim_cap = kDefaultDimCap);

}  // namespace heatlab
