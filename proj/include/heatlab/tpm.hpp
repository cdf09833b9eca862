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
#include <cstdint>
#include <string>
#include <vector>

#include "heatlab/gge.hpp"
#include "heatlab/models.hpp"
#include "heatlab/operator.hpp"

namespace heatlab {

/// Simultaneous eigenbasis of a commuting family with the measured
/// eigenvalue tuple of every basis vector.
struct OutcomeTable {
  CMatrix basis;   // columns are the simultaneous eigenvectors
  RMatrix tuples;  // row c holds the eigenvalues of column c, generator order

  std::size_t size() const { return static_cast<std::size_t>(basis.cols()); }
  std::size_t arity() const { return static_cast<std::size_t>(tuples.cols()); }
};

/// Sequential refinement: diagonalize ops[0], then diagonalize each later
/// operator restricted to every cluster of still-degenerate columns.
///
/// Throws CommutationError if some pair fails to commute within tol*scale
/// and NumericalError if an eigen-equation residual exceeds 10*tol*scale.
OutcomeTable simultaneous_eigenbasis(const std::vector<OperatorMatrix>& ops, double tol = 1e-10);

/// Outcome table of a subsystem's generators (H, shared, exclusive).
OutcomeTable outcome_table(const SystemSpec& spec);

/// Product table for the joint space; column nA * dim_b + nB carries the
/// concatenated tuple (A tuple, B tuple).
OutcomeTable product_table(const OutcomeTable& a, const OutcomeTable& b,
                           std::size_t dim_cap = kDefaultDimCap);

/// p_c = exp(-theta . tuple_c - log Z).
RVector initial_probabilities(const GGEState& state, const OutcomeTable& table);

/// exp(-i tau H_total) with the eigensystem it was built from.
struct Evolution {
  double tau = 0.0;
  EigenSystem spectrum;
  CMatrix unitary;
  double unitarity_residual = 0.0;  // max|U^dagger U - 1|
  double symmetry_residual = 0.0;   // max|U - U^T|
};

/// Throws TimeReversalError if H_total is not real and NumericalError if
/// the unitarity residual exceeds 1e-8. tau == 0 yields the exact identity.
Evolution evolve_unitary(const CompositeSystem& cs, double tau);

/// T(m, n) = |<m|U|n>|^2 in the basis of `joint`.
RMatrix transition_matrix(const CMatrix& unitary, const OutcomeTable& joint);

/// Same, evaluated as sum_k exp(-i tau E_k) (Y_mk Y_nk) with Y = B^T V when
/// both the basis B and the eigenvectors V are real. The amplitude matrix is
/// then symmetric bit for bit, which is the numerical statement of
/// time-reversal invariance.
RMatrix transition_matrix(const Evolution& evolution, const OutcomeTable& joint);

/// Row and column sums of T minus one, as max deviation.
double stochasticity_residual(const RMatrix& t);

/// Which per-pair quantity to read from a JointDistribution.
enum class Quantity { sigma, heat_a, heat_b };

std::string quantity_name(Quantity q);

/// One (initial outcome n, final outcome m) pair with joint indices.
struct PairRecord {
  std::size_t n = 0;
  std::size_t m = 0;
  double probability = 0.0;
  double sigma = 0.0;   // exponent change h_m - h_n
  double heat_a = 0.0;  // generalized heat from A-side differences
  double heat_b = 0.0;  // generalized heat from B-side differences

  double value(Quantity q) const {
    switch (q) {
      case Quantity::heat_a:
        return heat_a;
      case Quantity::heat_b:
        return heat_b;
      default:
        return sigma;
    }
  }
};

/// Transitions below this probability are treated as exact zeros and not
/// stored; their total weight is bounded by dim^2 * kTransitionFloor.
inline constexpr double kTransitionFloor = 1e-24;

struct JointDistribution {
  std::vector<PairRecord> entries;  // sorted by (n, m)
  RVector initial_probs;            // joint p_n, index nA * dim_b + nB
  RVector exponents;                // h_n = theta_A . tuple_A + theta_B . tuple_B
  bool sampled = false;
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
  double tau = 0.0;
  double g = 0.0;
  std::string model_a;
  std::string model_b;

  double total_probability() const;
  /// sum_m p_nm for each n.
  RVector marginal_initial() const;
  /// Index of the record for (n, m), or entries.size() if absent.
  std::size_t find(std::size_t n, std::size_t m) const;
};

/// Enumerates all pairs with p_nm = pA(nA) pB(nB) T(m, n).
JointDistribution joint_distribution(const RVector& pa, const RVector& pb, const RMatrix& t,
                                     const OutcomeTable& table_a, const OutcomeTable& table_b,
                                     const GeneralizedTemperatures& temps_a,
                                     const GeneralizedTemperatures& temps_b);

/// Monte Carlo estimate of joint_distribution.
///
/// Samples are drawn in fixed blocks; block k uses an mt19937_64 stream
/// seeded from (seed, k), so the output depends only on (count, seed) and
/// not on `threads`.
JointDistribution sample_trajectories(const RVector& pa, const RVector& pb, const RMatrix& t,
                                      const OutcomeTable& table_a, const OutcomeTable& table_b,
                                      const GeneralizedTemperatures& temps_a,
                                      const GeneralizedTemperatures& temps_b, std::uint64_t count,
                                      std::uint64_t seed, unsigned threads = 1);

struct Atom {
  double value = 0.0;
  double probability = 0.0;
};

/// Merges values closer than bin_eps * max(1, max|value|) by single
/// linkage; each atom sits at the midpoint of its cluster, so the support
/// of a distribution symmetric under negation stays exactly symmetric.
std::vector<Atom> binned_distribution(const JointDistribution& jd, Quantity q,
                                      double bin_eps = 1e-9);

}  // namespace heatlab
