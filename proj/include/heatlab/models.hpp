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
#include <string>
#include <variant>
#include <vector>

#include "heatlab/operator.hpp"

namespace heatlab {

/// Tolerance for the commutation assumptions, relative to operator scale.
inline constexpr double kCommutationTolerance = 1e-10;

namespace pauli {

OperatorMatrix x();
OperatorMatrix y();
OperatorMatrix z();

/// `op` acting on `site` of an `n_sites` spin-1/2 chain (site 0 leftmost).
OperatorMatrix at_site(const OperatorMatrix& op, std::size_t site, std::size_t n_sites);

/// Parses a real-coefficient sum of Pauli strings, e.g.
/// "0.5 * X[last_A] X[first_B] + 0.5 * Y[last_A] Y[first_B]".
///
/// Site labels: an integer index, `first`, `last`, or any of those suffixed
/// with `_A` / `_B` (e.g. `2_A`, `A2`, `last_B`). With `n_sites_b == 0`
/// the operator lives on a single chain of `n_sites_a` sites and only
/// unsuffixed labels are accepted. The result must be Hermitian.
OperatorMatrix parse_sum(const std::string& text, std::size_t n_sites_a,
                         std::size_t n_sites_b = 0);

}  // namespace pauli

struct NamedOperator {
  std::string name;
  OperatorMatrix op;
};

/// One subsystem: Hamiltonian plus its conserved charges.
///
/// Generator order is fixed everywhere as (H, shared..., exclusive...).
struct SystemSpec {
  Side label = Side::A;
  std::string model;  // model id echoed into results
  std::size_t n_sites = 1;
  std::size_t local_dim = 2;
  OperatorMatrix hamiltonian = OperatorMatrix::identity(2);
  std::vector<NamedOperator> shared_charges;     // I_k
  std::vector<NamedOperator> exclusive_charges;  // J_i on A, K_i on B

  std::size_t dim() const { return hamiltonian.dim(); }
  std::size_t generator_count() const {
    return 1 + shared_charges.size() + exclusive_charges.size();
  }
  /// H followed by shared then exclusive charges.
  std::vector<OperatorMatrix> generators() const;
  std::vector<std::string> generator_names() const;
};

/// Throws CommutationError / TimeReversalError / DimensionError if the
/// spec violates its invariants.
void validate(const SystemSpec& spec);

/// Open XX chain, sum (J/2)(XX + YY) + h sum Z, with shared charge Mz.
SystemSpec build_xx_chain(std::size_t n_sites, double coupling, double field, Side label);

/// Open Ising chain in a tilted field, J sum ZZ + hx sum X + hz sum Z.
SystemSpec build_tilted_ising_chain(std::size_t n_sites, double coupling, double hx, double hz,
                                    Side label);

/// Spec from an arbitrary Hermitian real Hamiltonian on `n_sites` qubits.
SystemSpec build_custom_system(std::size_t n_sites, const OperatorMatrix& hamiltonian,
                               Side label, std::string model = "custom");

/// Appends a verified charge; throws CommutationError with the offending
/// norm if `op` fails to commute with H or an existing charge.
SystemSpec add_exclusive_charge(SystemSpec spec, std::string name, const OperatorMatrix& op);
SystemSpec add_shared_charge(SystemSpec spec, std::string name, const OperatorMatrix& op);

namespace coupling {
/// (X_{A,last} X_{B,first} + Y_{A,last} Y_{B,first}) / 2.
struct Exchange {};
/// Z_{A,last} Z_{B,first}.
struct Ising {};
struct Custom {
  OperatorMatrix op;
};
}  // namespace coupling

using CouplingKind = std::variant<coupling::Exchange, coupling::Ising, coupling::Custom>;

std::string coupling_name(const CouplingKind& kind);

struct ConservationDiagnostics {
  /// max|[H_AB, I_k^A + I_k^B]| per shared charge.
  std::vector<double> shared_charge_norms;
  /// max|[H_AB, H_A + H_B]|.
  double energy_norm = 0.0;
};

struct CompositeSystem {
  SystemSpec spec_a;
  SystemSpec spec_b;
  CouplingKind kind;
  OperatorMatrix coupling = OperatorMatrix::identity(1);  // H_AB on the joint space
  double g = 0.0;
  OperatorMatrix total_hamiltonian = OperatorMatrix::identity(1);
  ConservationDiagnostics conservation;

  std::size_t dim_a() const { return spec_a.dim(); }
  std::size_t dim_b() const { return spec_b.dim(); }
  std::size_t dim() const { return total_hamiltonian.dim(); }
};

/// Builds the coupled system H_A + H_B + g H_AB.
///
/// Throws TimeReversalError if the coupling is not real in the
/// computational basis, and ContractError if the shared-charge lists of the
/// two sides differ in length or names.
CompositeSystem build_composite(const SystemSpec& spec_a, const SystemSpec& spec_b,
                                const CouplingKind& kind, double g,
                                std::size_t dim_cap = kDefaultDimCap);

struct AssumptionCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool passed() const;
};

/// Every commutator, reality and hermiticity residual the protocol relies
/// on. Diagnostic only, never throws on a failed check.
AssumptionReport verify_assumptions(const CompositeSystem& cs);
AssumptionReport verify_assumptions(const SystemSpec& spec);

}  // namespace heatlab
