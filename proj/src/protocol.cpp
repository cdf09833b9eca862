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

#include "heatlab/protocol.hpp"

namespace heatlab {

ProtocolRun run_protocol(const ProtocolInput& input) {
  ProtocolRun run{
      build_composite(input.spec_a, input.spec_b, input.coupling, input.g, input.dim_cap),
      gge_state(input.spec_a, input.temps_a),
      gge_state(input.spec_b, input.temps_b),
      outcome_table(input.spec_a),
      outcome_table(input.spec_b),
      {}, {}, {}, {}, {}, {},
      OperatorMatrix::identity(1), OperatorMatrix::identity(1), OperatorMatrix::identity(1)};
  run.joint_table = product_table(run.table_a, run.table_b, input.dim_cap);
  run.pa = initial_probabilities(run.state_a, run.table_a);
  run.pb = initial_probabilities(run.state_b, run.table_b);
  run.evolution = evolve_unitary(run.system, input.tau);
  run.transitions = transition_matrix(run.evolution, run.joint_table);
  run.distribution = joint_distribution(run.pa, run.pb, run.transitions, run.table_a, run.table_b,
                                        input.temps_a, input.temps_b);
  run.distribution.tau = input.tau;
  run.distribution.g = input.g;
  run.distribution.model_a = input.spec_a.model;
  run.distribution.model_b = input.spec_b.model;

  const std::size_t da = input.spec_a.dim();
  const std::size_t db = input.spec_b.dim();
  run.exponent = embed(run.state_a.exponent, Side::A, da, db, input.dim_cap) +
                 embed(run.state_b.exponent, Side::B, da, db, input.dim_cap);
  run.rho0 = product_initial_state(run.state_a, run.state_b, input.dim_cap);
  const CMatrix& u = run.evolution.unitary;
  run.rho_tau = OperatorMatrix::hermitian(CMatrix(u * run.rho0.entries() * u.adjoint()));
  return run;
}

JointDistribution sample_protocol(const ProtocolRun& run, std::uint64_t count, std::uint64_t seed,
                                  unsigned threads) {
  JointDistribution jd =
      sample_trajectories(run.pa, run.pb, run.transitions, run.table_a, run.table_b,
                          run.state_a.theta, run.state_b.theta, count, seed, threads);
  jd.tau = run.distribution.tau;
  jd.g = run.distribution.g;
  jd.model_a = run.distribution.model_a;
  jd.model_b = run.distribution.model_b;
  return jd;
}

}  // namespace heatlab
