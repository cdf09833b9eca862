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

#include "heatlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatlab/error.hpp"

namespace heatlab {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace {

double max_imag(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.imag().cwiseAbs().maxCoeff();
}

void require_square(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError("operator must be square with dim >= 1, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Makes the first component with magnitude above the column's noise floor
// real and positive.
void fix_phases(CMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double floor = 1e-8 * v.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double mag = std::abs(v(r, c));
      if (mag > floor) {
        v.col(c) *= std::conj(v(r, c)) / mag;
        v(r, c) = Complex(mag, 0.0);
        break;
      }
    }
  }
}

}  // namespace

OperatorMatrix::OperatorMatrix(CMatrix m, bool hermitian)
    : entries_(std::move(m)), hermitian_(hermitian) {
  real_ = max_imag(entries_) <= kFlagTolerance * max_abs(entries_);
}

OperatorMatrix OperatorMatrix::hermitian(CMatrix m) {
  require_square(m);
  const double scale = max_abs(m);
  const double residual = max_abs(m - m.adjoint());
  if (residual > kFlagTolerance * scale) {
    throw ContractError("operator is not Hermitian: max|A - A^dagger| = " +
                        std::to_string(residual));
  }
  CMatrix sym = 0.5 * (m + m.adjoint());
  if (max_imag(sym) <= kFlagTolerance * scale) sym = sym.real().cast<Complex>();
  return OperatorMatrix(std::move(sym), true);
}

OperatorMatrix OperatorMatrix::hermitian(const RMatrix& m) {
  return hermitian(CMatrix(m.cast<Complex>()));
}

OperatorMatrix OperatorMatrix::general(CMatrix m) {
  require_square(m);
  const bool exact = (m - m.adjoint()).cwiseAbs().maxCoeff() == 0.0;
  return OperatorMatrix(std::move(m), exact);
}

OperatorMatrix OperatorMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return OperatorMatrix(CMatrix::Identity(n, n), true);
}

OperatorMatrix OperatorMatrix::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return OperatorMatrix(CMatrix::Zero(n, n), true);
}

OperatorMatrix OperatorMatrix::diagonal(const RVector& d) {
  CMatrix m = d.cast<Complex>().asDiagonal();
  require_square(m);
  return OperatorMatrix(std::move(m), true);
}

double OperatorMatrix::scale() const { return max_abs(entries_); }

double OperatorMatrix::imag_residual() const { return max_imag(entries_); }

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("operator sum: dimension mismatch");
  return OperatorMatrix(entries_ + o.entries_, hermitian_ && o.hermitian_);
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("operator difference: dimension mismatch");
  return OperatorMatrix(entries_ - o.entries_, hermitian_ && o.hermitian_);
}

OperatorMatrix OperatorMatrix::operator*(double s) const {
  return OperatorMatrix(entries_ * s, hermitian_);
}

CMatrix EigenSystem::apply(const std::function<Complex(double)>& f) const {
  Eigen::VectorXcd fd(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) fd(i) = f(eigenvalues(i));
  return eigenvectors * fd.asDiagonal() * eigenvectors.adjoint();
}

double EigenSystem::reconstruction_residual(const OperatorMatrix& a) const {
  const CMatrix rebuilt =
      eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  return max_abs(a.entries() - rebuilt);
}

double EigenSystem::orthonormality_residual() const {
  const auto n = eigenvectors.cols();
  return max_abs(eigenvectors.adjoint() * eigenvectors - CMatrix::Identity(n, n));
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b, std::size_t dim_cap) {
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  if (da > dim_cap / db) {
    throw CapacityError("kron: dimension " + std::to_string(da) + "*" + std::to_string(db) +
                        " exceeds cap " + std::to_string(dim_cap));
  }
  const auto na = static_cast<Eigen::Index>(da);
  const auto nb = static_cast<Eigen::Index>(db);
  CMatrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      out.block(i * nb, j * nb, nb, nb) = a.entries()(i, j) * b.entries();
    }
  }
  if (a.is_hermitian() && b.is_hermitian()) return OperatorMatrix::hermitian(std::move(out));
  return OperatorMatrix::general(std::move(out));
}

EigenSystem eigh(const OperatorMatrix& a) {
  if (!a.is_hermitian()) throw ContractError("eigh: operator is not flagged Hermitian");
  EigenSystem es;
  es.source_dim = a.dim();
  if (a.is_real()) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(a.entries().real());
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigh: real symmetric eigensolver did not converge");
    }
    es.eigenvalues = solver.eigenvalues();
    es.eigenvectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.entries());
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigh: Hermitian eigensolver did not converge");
    }
    es.eigenvalues = solver.eigenvalues();
    es.eigenvectors = solver.eigenvectors();
  }
  fix_phases(es.eigenvectors);

  const double scale = a.scale();
  const double residual = es.reconstruction_residual(a);
  if (residual > 1e-10 * scale) {
    throw NumericalError("eigh: reconstruction residual " + std::to_string(residual) +
                             " exceeds 1e-10 * scale",
                         residual);
  }
  return es;
}

FunctionResult op_func(const EigenSystem& es, const std::function<double(double)>& f,
                       Clamp clamp) {
  RVector lambda = es.eigenvalues;
  int clamped = 0;
  if (clamp == Clamp::relative_floor && lambda.size() > 0) {
    const double floor = kClampFloor * lambda.maxCoeff();
    for (auto& l : lambda) {
      if (l < floor) {
        l = floor;
        ++clamped;
      }
    }
  }
  RVector fl(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    fl(i) = f(lambda(i));
    if (!std::isfinite(fl(i))) {
      throw DomainError("op_func: function is not finite at eigenvalue " +
                        std::to_string(lambda(i)));
    }
  }
  CMatrix out = es.eigenvectors * fl.cast<Complex>().asDiagonal() * es.eigenvectors.adjoint();
  return {OperatorMatrix::hermitian(std::move(out)), clamped};
}

FunctionResult op_func(const OperatorMatrix& a, const std::function<double(double)>& f,
                       Clamp clamp) {
  return op_func(eigh(a), f, clamp);
}

double commutator_norm(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("commutator_norm: dimensions " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()) + " differ");
  }
  return max_abs(a * b - b * a);
}

OperatorMatrix embed(const OperatorMatrix& local, Side side, std::size_t dim_a,
                     std::size_t dim_b, std::size_t dim_cap) {
  const std::size_t expected = side == Side::A ? dim_a : dim_b;
  if (local.dim() != expected) {
    throw DimensionError("embed: local dimension " + std::to_string(local.dim()) +
                         " does not match side dimension " + std::to_string(expected));
  }
  if (side == Side::A) return kron(local, OperatorMatrix::identity(dim_b), dim_cap);
  return kron(OperatorMatrix::identity(dim_a), local, dim_cap);
}

}  // namespace heatlab
