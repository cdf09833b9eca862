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

#include "heatlab/gge.hpp"
#include "heatlab/models.hpp"
#include "heatlab/tpm.hpp"

namespace heatlab {

/// Everything needed to run the two-measurement protocol once.
struct ProtocolInput {
  SystemSpec spec_a;
  SystemSpec spec_b;
  GeneralizedTemperatures temps_a;
  GeneralizedTemperatures temps_b;
  CouplingKind coupling = coupling::Exchange{};
  double g = 0.0;
  double tau = 0.0;
  std::size_t dim_cap = kDefaultDimCap;
};

/// Intermediate and final objects of one protocol run.
struct ProtocolRun {
  CompositeSystem system;
  GGEState state_a;
  GGEState state_b;
  OutcomeTable table_a;
  OutcomeTable table_b;
  OutcomeTable joint_table;
  RVector pa;
  RVector pb;
  Evolution evolution;
  RMatrix transitions;
  JointDistribution distribution;
  /// h = calH_A (x) 1 + 1 (x) calH_B, the joint GGE exponent.
  OperatorMatrix exponent = OperatorMatrix::identity(1);
  OperatorMatrix rho0 = OperatorMatrix::identity(1);
  OperatorMatrix rho_tau = OperatorMatrix::identity(1);
};

/// Prepares the product GGE, measures, evolves and enumerates every
/// outcome pair.
ProtocolRun run_protocol(const ProtocolInput& input);

/// Replaces the enumerated distribution of `run` by a Monte Carlo one.
JointDistribution sample_protocol(const ProtocolRun& run, std::uint64_t count, std::uint64_t seed,
                                  unsigned threads = 1);

}  // namespace heatlab
