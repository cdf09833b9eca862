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

#include <optional>

#include <Eigen/Dense>

namespace heatlab::detail {

/// Dense two-phase simplex with Bland's rule for
///   maximize c.y  subject to  A y = b,  y >= 0.
/// Returns the optimal objective, or nullopt when infeasible. Unbounded
/// problems are reported as +infinity.
std::optional<double> simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& c, double tol = 1e-11);

}  // namespace heatlab::detail
