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

#include "simplex.hpp"

#include <limits>
#include <vector>

namespace heatlab::detail {

namespace {

using Eigen::Index;

class Tableau {
 public:
  // Rows 0..m-1 are constraints, the last column is the right-hand side.
  Tableau(Eigen::MatrixXd t, std::vector<Index> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Index rows() const { return t_.rows(); }
  Index rhs_col() const { return t_.cols() - 1; }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Maximizes cost.y over columns [0, n_cols). Returns false if unbounded.
  bool optimize(const Eigen::VectorXd& cost, Index n_cols, double tol) {
    for (int guard = 0; guard < 100000; ++guard) {
      // Reduced cost of column j: cost_j - cost_B . column_j.
      Index enter = -1;
      for (Index j = 0; j < n_cols; ++j) {
        double reduced = cost(j);
        for (Index i = 0; i < rows(); ++i) reduced -= cost_of(basis_[i], cost) * t_(i, j);
        if (reduced > tol) {
          enter = j;
          break;  // Bland: first improving column
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < rows(); ++i) {
        if (t_(i, enter) > tol) {
          const double ratio = t_(i, rhs_col()) / t_(i, enter);
          if (ratio < best - tol ||
              (ratio <= best + tol && leave >= 0 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }

  double objective(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (Index i = 0; i < rows(); ++i) v += cost_of(basis_[i], cost) * t_(i, rhs_col());
    return v;
  }

  const Eigen::MatrixXd& table() const { return t_; }
  std::vector<Index>& basis() { return basis_; }

 private:
  static double cost_of(Index col, const Eigen::VectorXd& cost) {
    return col < cost.size() ? cost(col) : 0.0;
  }

  Eigen::MatrixXd t_;
  std::vector<Index> basis_;
};

}  // namespace

std::optional<double> simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& c, double tol) {
  const Index m = a.rows();
  const Index n = a.cols();
  // Columns: n originals, m artificials, rhs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, n + m + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign * b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }
  Tableau tab(std::move(t), std::move(basis));

  // Phase 1: maximize -sum(artificials).
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  tab.optimize(phase1, n + m, tol);
  if (-tab.objective(phase1) > 1e3 * tol) return std::nullopt;

  // Drive zero-level artificials out of the basis where possible.
  for (Index i = 0; i < tab.rows(); ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(tab.table()(i, j)) > tol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 over the original columns; artificials left in the basis sit on
  // redundant rows at level zero.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + m);
  cost.head(n) = c;
  if (!tab.optimize(cost, n, tol)) return std::numeric_limits<double>::infinity();
  return tab.objective(cost);
}

}  // namespace heatlab::detail
