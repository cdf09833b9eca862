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

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace heatlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Largest joint Hilbert space dimension accepted by default.
inline constexpr std::size_t kDefaultDimCap = 4096;

/// Relative tolerance for the hermiticity and reality flags.
inline constexpr double kFlagTolerance = 1e-12;

/// Dense square complex matrix with hermiticity and reality flags.
///
/// Values are immutable once built. Hermitian construction symmetrizes
/// the input, after checking that the anti-Hermitian part is below
/// kFlagTolerance times the largest entry.
class OperatorMatrix {
 public:
  /// Builds a Hermitian operator; throws ContractError if `m` is not
  /// Hermitian to within kFlagTolerance.
  static OperatorMatrix hermitian(CMatrix m);
  static OperatorMatrix hermitian(const RMatrix& m);
  /// Builds an operator without symmetrization. The hermitian flag is set
  /// only if the input is exactly Hermitian.
  static OperatorMatrix general(CMatrix m);

  static OperatorMatrix identity(std::size_t dim);
  static OperatorMatrix zero(std::size_t dim);
  static OperatorMatrix diagonal(const RVector& d);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  bool is_hermitian() const { return hermitian_; }
  bool is_real() const { return real_; }

  /// Largest entry magnitude.
  double scale() const;
  /// Largest imaginary part magnitude.
  double imag_residual() const;
  Complex trace() const { return entries_.trace(); }

  OperatorMatrix operator+(const OperatorMatrix& o) const;
  OperatorMatrix operator-(const OperatorMatrix& o) const;
  OperatorMatrix operator*(double s) const;
  OperatorMatrix operator-() const { return *this * -1.0; }
  /// Matrix product; the result is Hermitian only if exactly so.
  CMatrix operator*(const OperatorMatrix& o) const { return entries_ * o.entries_; }

 private:
  OperatorMatrix(CMatrix m, bool hermitian);

  CMatrix entries_;
  bool hermitian_ = false;
  bool real_ = false;
};

inline OperatorMatrix operator*(double s, const OperatorMatrix& a) { return a * s; }

/// Spectral decomposition A = V diag(eigenvalues) V^dagger.
struct EigenSystem {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors;  // columns, phase fixed
  std::size_t source_dim = 0;

  /// Rebuilds V f(Lambda) V^dagger.
  CMatrix apply(const std::function<Complex(double)>& f) const;
  /// Residual max|A - V Lambda V^dagger|.
  double reconstruction_residual(const OperatorMatrix& a) const;
  /// max|V^dagger V - 1|.
  double orthonormality_residual() const;
};

/// Which factor of a bipartite space an operator acts on.
enum class Side { A, B };

/// Kronecker product with row index i*dim_b + k.
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b,
                    std::size_t dim_cap = kDefaultDimCap);

/// Hermitian eigendecomposition, ascending eigenvalues.
///
/// Real-symmetric input is diagonalized in real arithmetic so that the
/// eigenvectors are real. Each eigenvector is multiplied by a phase making
/// its first non-negligible component real and positive.
EigenSystem eigh(const OperatorMatrix& a);

/// How op_func treats eigenvalues near zero.
enum class Clamp {
  none,
  /// Raise eigenvalues below 1e-14 * lambda_max to that floor.
  relative_floor,
};

inline constexpr double kClampFloor = 1e-14;

struct FunctionResult {
  OperatorMatrix value;
  int clamped = 0;
};

/// V f(Lambda) V^dagger for a real function f.
FunctionResult op_func(const OperatorMatrix& a, const std::function<double(double)>& f,
                       Clamp clamp = Clamp::none);
FunctionResult op_func(const EigenSystem& es, const std::function<double(double)>& f,
                       Clamp clamp = Clamp::none);

/// max|ab - ba|.
double commutator_norm(const OperatorMatrix& a, const OperatorMatrix& b);

/// Lifts a local operator to the joint space of A and B.
OperatorMatrix embed(const OperatorMatrix& local, Side side, std::size_t dim_a,
                     std::size_t dim_b, std::size_t dim_cap = kDefaultDimCap);

/// max|m|, the entrywise scale used by relative tolerances.
double max_abs(const CMatrix& m);

}  // namespace heatlab
