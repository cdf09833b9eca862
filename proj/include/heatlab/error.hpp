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

#include <stdexcept>
#include <string>

namespace heatlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A joint Hilbert space would exceed the configured dimension cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the arguments was violated (shape, hermiticity, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Operators that must commute do not.
class CommutationError : public ContractError {
 public:
  CommutationError(const std::string& what, double norm)
      : ContractError(what), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

/// The Hamiltonian is not invariant under complex conjugation.
class TimeReversalError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Floating point failure: eigensolver residual, unitarity drift, etc.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A scalar function was applied outside its domain.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Inputs whose magnitude would overflow even with shifted exponentials.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Fractional powers of a density matrix are too ill-conditioned to trust.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Moment targets lie on or outside the moment polytope.
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace heatlab
