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

#include "heatlab/gge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatlab/error.hpp"
#include "heatlab/tpm.hpp"
#include "simplex.hpp"

namespace heatlab {

GeneralizedTemperatures GeneralizedTemperatures::for_spec(const SystemSpec& spec, RVector values) {
  if (static_cast<std::size_t>(values.size()) != spec.generator_count()) {
    throw ContractError("expected " + std::to_string(spec.generator_count()) +
                        " generalized temperatures, got " + std::to_string(values.size()));
  }
  return {std::move(values), spec.shared_charges.size(), spec.exclusive_charges.size()};
}

GeneralizedTemperatures GeneralizedTemperatures::zeros(const SystemSpec& spec) {
  return for_spec(spec, RVector::Zero(static_cast<Eigen::Index>(spec.generator_count())));
}

GGEState gge_state(const SystemSpec& spec, const GeneralizedTemperatures& theta) {
  const auto gens = spec.generators();
  if (theta.size() != gens.size() || theta.n_shared != spec.shared_charges.size() ||
      theta.n_exclusive != spec.exclusive_charges.size()) {
    throw ContractError("temperature layout does not match the system's generators");
  }
  for (Eigen::Index i = 0; i < theta.values.size(); ++i) {
    const double v = theta.values(i);
    if (!std::isfinite(v) || std::abs(v) > kMaxTheta) {
      throw RangeError("generalized temperature " + std::to_string(i) + " = " +
                       std::to_string(v) + " is outside [-1e3, 1e3]");
    }
  }

  OperatorMatrix exponent = OperatorMatrix::zero(spec.dim());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    exponent = exponent + theta.values(static_cast<Eigen::Index>(i)) * gens[i];
  }
  EigenSystem es = eigh(exponent);

  // log Z = -lambda_min + log sum exp(-(lambda - lambda_min)).
  const double shift = es.eigenvalues.minCoeff();
  double acc = 0.0;
  for (const double l : es.eigenvalues) acc += std::exp(-(l - shift));
  const double log_z = -shift + std::log(acc);
  if (!std::isfinite(log_z)) throw RangeError("log partition function overflowed");

  RVector pop(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < pop.size(); ++i) pop(i) = std::exp(-es.eigenvalues(i) - log_z);
  CMatrix rho = es.eigenvectors * pop.cast<Complex>().asDiagonal() * es.eigenvectors.adjoint();

  GGEState state;
  state.spec = spec;
  state.theta = theta;
  state.exponent = exponent;
  state.rho = OperatorMatrix::hermitian(std::move(rho));
  state.log_z = log_z;
  state.exponent_spectrum = std::move(es);
  state.min_population = pop.minCoeff();
  return state;
}

namespace {

// Re Tr[a b] without forming the product.
double trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

}  // namespace

RVector moments(const GGEState& state) {
  const auto gens = state.spec.generators();
  RVector out(static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = trace_product(state.rho.entries(), gens[i].entries());
  }
  return out;
}

RMatrix covariance_matrix(const GGEState& state) {
  const auto gens = state.spec.generators();
  const auto k = static_cast<Eigen::Index>(gens.size());
  const RVector mean = moments(state);
  RMatrix c(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const CMatrix rho_oj = state.rho.entries() * gens[static_cast<std::size_t>(j)].entries();
    for (Eigen::Index l = j; l < k; ++l) {
      const double v =
          trace_product(rho_oj, gens[static_cast<std::size_t>(l)].entries()) - mean(j) * mean(l);
      c(j, l) = v;
      c(l, j) = v;
    }
  }
  return c;
}

double moment_polytope_margin(const RMatrix& tuples, const RVector& target) {
  const Eigen::Index n = tuples.rows();
  const Eigen::Index k = tuples.cols();
  if (target.size() != k) throw DimensionError("moment target has the wrong length");
  if (n == 0) return -1.0;

  // Centre on the target and normalize every coordinate, then solve
  //   max t  s.t.  w_c = t + v_c,  v >= 0,  t >= 0,  sum w = 1,  sum w_c s_c = target.
  RMatrix centred = tuples.rowwise() - target.transpose();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = centred.col(j).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      centred.col(j) /= s;
      rows.push_back(j);
    }
  }
  const auto m = static_cast<Eigen::Index>(1 + rows.size());
  RMatrix a = RMatrix::Zero(m, n + 1);
  RVector b = RVector::Zero(m);
  a.row(0).head(n).setOnes();
  a(0, n) = static_cast<double>(n);
  b(0) = 1.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r + 1);
    a.row(row).head(n) = centred.col(rows[r]).transpose();
    a(row, n) = centred.col(rows[r]).sum();
  }
  RVector cost = RVector::Zero(n + 1);
  cost(n) = 1.0;
  const auto best = detail::simplex_maximize(a, b, cost);
  if (!best) return -1.0;
  return static_cast<double>(n) * *best;
}

FitResult fit_temperatures(const SystemSpec& spec, const MomentTargets& targets,
                           const GeneralizedTemperatures& theta0, const FitOptions& options) {
  const auto k = static_cast<Eigen::Index>(spec.generator_count());
  if (targets.values.size() != k) {
    throw ContractError("expected " + std::to_string(k) + " moment targets, got " +
                        std::to_string(targets.values.size()));
  }
  if (!targets.values.allFinite()) throw ContractError("moment targets must be finite");

  const OutcomeTable table = outcome_table(spec);
  const double margin = moment_polytope_margin(table.tuples, targets.values);
  if (margin <= kMinPolytopeMargin) {
    throw InfeasibleTargetError(
        "moment targets are not strictly inside the joint spectrum hull (margin " +
        std::to_string(margin) + ")");
  }

  const RVector& t = targets.values;
  FitResult result;
  result.theta = theta0;
  GGEState state = gge_state(spec, result.theta);
  auto objective = [&](const GGEState& s) { return s.log_z + s.theta.values.dot(t); };
  double f = objective(state);
  result.objective.push_back(f);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const RVector m = moments(state);
    const RVector r = m - t;
    result.residual = r.cwiseAbs().maxCoeff();
    result.iterations = iter;
    if (result.residual <= options.tol) return result;

    RMatrix c = covariance_matrix(state);
    Eigen::SelfAdjointEigenSolver<RMatrix> ces(c);
    const double cmax = std::max(ces.eigenvalues().maxCoeff(), 1e-300);
    const double cmin = ces.eigenvalues().minCoeff();
    if (cmin <= 0.0 || cmax / cmin > 1e12) c += (1e-12 * cmax) * RMatrix::Identity(k, k);
    const RVector step = c.ldlt().solve(r);
    const double slope = -r.dot(step);  // directional derivative of the dual

    double s = 1.0;
    bool accepted = false;
    GGEState trial;
    while (s >= 1e-12) {
      GeneralizedTemperatures next = result.theta;
      next.values += s * step;
      if (next.values.cwiseAbs().maxCoeff() > kMaxTheta) {
        throw InfeasibleTargetError("generalized temperatures diverged beyond |theta| = 1e3");
      }
      trial = gge_state(spec, next);
      const double f_new = objective(trial);
      // The rounding allowance lets quadratic convergence finish once the
      // decrease drops below the resolution of f.
      if (f_new <= f + 1e-4 * s * slope + 1e-14 * std::max(1.0, std::abs(f))) {
        result.theta = next;
        f = f_new;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      throw InfeasibleTargetError("line search failed with residual " +
                                  std::to_string(result.residual));
    }
    state = std::move(trial);
    result.objective.push_back(f);
  }

  const RVector r = moments(state) - t;
  result.residual = r.cwiseAbs().maxCoeff();
  if (result.residual <= options.tol) {
    result.iterations = options.max_iter;
    return result;
  }
  throw ConvergenceError("fit_temperatures did not converge in " +
                             std::to_string(options.max_iter) + " iterations, residual " +
                             std::to_string(result.residual),
                         result.residual);
}

OperatorMatrix product_initial_state(const GGEState& a, const GGEState& b, std::size_t dim_cap) {
  return kron(a.rho, b.rho, dim_cap);
}

}  // namespace heatlab
