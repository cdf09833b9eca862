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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "heatlab/analysis.hpp"
#include "heatlab/gge.hpp"
#include "heatlab/models.hpp"
#include "heatlab/protocol.hpp"

namespace heatlab::testing {

inline CMatrix random_complex(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(d, d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline OperatorMatrix random_hermitian(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  const CMatrix m = random_complex(d, rng, scale);
  return OperatorMatrix::hermitian(CMatrix(0.5 * (m + m.adjoint())));
}

inline OperatorMatrix random_real_symmetric(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  RMatrix m(d, d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
  }
  return OperatorMatrix::hermitian(RMatrix(0.5 * (m + m.transpose())));
}

/// Density matrix with full rank from a random Hermitian exponent.
inline OperatorMatrix random_density(std::size_t d, std::mt19937_64& rng) {
  const auto e = op_func(random_hermitian(d, rng, 0.5), [](double x) { return std::exp(x); });
  return e.value * (1.0 / e.value.trace().real());
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline GeneralizedTemperatures random_theta(const SystemSpec& spec, std::mt19937_64& rng,
                                            double bound) {
  RVector v(static_cast<Eigen::Index>(spec.generator_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(rng, -bound, bound);
  return GeneralizedTemperatures::for_spec(spec, v);
}

inline ProtocolInput xx_pair(std::size_t na, std::size_t nb, double g, double tau,
                             const RVector& theta_a, const RVector& theta_b, double h = 0.3) {
  ProtocolInput in;
  in.spec_a = build_xx_chain(na, 1.0, h, Side::A);
  in.spec_b = build_xx_chain(nb, 1.0, h, Side::B);
  in.temps_a = GeneralizedTemperatures::for_spec(in.spec_a, theta_a);
  in.temps_b = GeneralizedTemperatures::for_spec(in.spec_b, theta_b);
  in.coupling = coupling::Exchange{};
  in.g = g;
  in.tau = tau;
  return in;
}

/// A randomized pair from the family used by the fluctuation-theorem
/// properties: XX chains with shared Mz (even index) or tilted Ising
/// chains with energy only (odd index).
inline ProtocolInput random_pair(std::size_t index, std::mt19937_64& rng) {
  const std::size_t na = 2 + (index / 2) % 2;
  const std::size_t nb = 2 + (index / 4) % 2;
  ProtocolInput in;
  if (index % 2 == 0) {
    in.spec_a = build_xx_chain(na, uniform(rng, 0.5, 1.5), uniform(rng, -0.5, 0.5), Side::A);
    in.spec_b = build_xx_chain(nb, uniform(rng, 0.5, 1.5), uniform(rng, -0.5, 0.5), Side::B);
    in.coupling = coupling::Exchange{};
  } else {
    in.spec_a = build_tilted_ising_chain(na, 1.0, uniform(rng, 0.5, 1.2), uniform(rng, 0.2, 0.9),
                                         Side::A);
    in.spec_b = build_tilted_ising_chain(nb, 1.0, uniform(rng, 0.5, 1.2), uniform(rng, 0.2, 0.9),
                                         Side::B);
    in.coupling = (index / 2) % 2 == 0 ? CouplingKind{coupling::Ising{}}
                                       : CouplingKind{coupling::Exchange{}};
  }
  in.temps_a = random_theta(in.spec_a, rng, 1.5);
  in.temps_b = random_theta(in.spec_b, rng, 1.5);
  in.g = uniform(rng, 0.0, 1.0);
  in.tau = uniform(rng, 0.0, 10.0);
  return in;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("heatlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace heatlab::testing
