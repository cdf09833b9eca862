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

#include <doctest.h>

#include <cmath>
#include <random>

#include "heatlab/error.hpp"
#include "heatlab/models.hpp"
#include "heatlab/operator.hpp"
#include "support.hpp"

using namespace heatlab;
using heatlab::testing::random_hermitian;
using heatlab::testing::random_real_symmetric;

namespace {

OperatorMatrix diag(std::initializer_list<double> values) {
  RVector d(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double v : values) d(i++) = v;
  return OperatorMatrix::diagonal(d);
}

RVector sorted_spectrum(const OperatorMatrix& a) {
  RVector v = eigh(a).eigenvalues;
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("operator") {

TEST_CASE("kron of identities and of a Pauli with identity") {
  CHECK(max_abs(kron(OperatorMatrix::identity(2), OperatorMatrix::identity(2)).entries() -
                CMatrix::Identity(4, 4)) == 0.0);
  CHECK(max_abs(kron(pauli::z(), OperatorMatrix::identity(2)).entries() -
                diag({1, 1, -1, -1}).entries()) == 0.0);
}

TEST_CASE("kron matches index arithmetic on a random vector") {
  std::mt19937_64 rng(7);
  const auto xx = kron(pauli::x(), pauli::x());
  const CMatrix x = pauli::x().entries();
  const CMatrix v = testing::random_complex(4, rng).col(0);
  CMatrix expected = CMatrix::Zero(4, 1);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) expected(i) += x(i / 2, j / 2) * x(i % 2, j % 2) * v(j);
  }
  CHECK(max_abs(xx.entries() * v - expected) <= 1e-14);
}

TEST_CASE("kron is associative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_hermitian(2, rng);
    const auto b = random_hermitian(3, rng);
    const auto c = random_hermitian(2, rng);
    CHECK(max_abs(kron(kron(a, b), c).entries() - kron(a, kron(b, c)).entries()) <= 1e-14);
  }
}

TEST_CASE("kron refuses to exceed the dimension cap") {
  CHECK_THROWS_AS(kron(OperatorMatrix::identity(64), OperatorMatrix::identity(128)), CapacityError);
  CHECK_NOTHROW(kron(OperatorMatrix::identity(64), OperatorMatrix::identity(64)));
}

TEST_CASE("eigh on closed forms") {
  const RVector z = sorted_spectrum(pauli::z());
  CHECK(z(0) == -1.0);
  CHECK(z(1) == 1.0);
  const RVector one = eigh(OperatorMatrix::identity(5)).eigenvalues;
  CHECK((one.array() - 1.0).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("eigh reconstructs random Hermitian matrices") {
  std::mt19937_64 rng(3);
  for (const std::size_t d : {2u, 5u, 8u, 16u}) {
    const auto a = random_hermitian(d, rng);
    const auto es = eigh(a);
    CHECK(es.reconstruction_residual(a) <= 1e-10 * a.scale());
    CHECK(es.orthonormality_residual() <= 1e-12);
    const auto r = random_real_symmetric(d, rng);
    CHECK(eigh(r).reconstruction_residual(r) <= 1e-10 * r.scale());
  }
}

TEST_CASE("hermitian rejects non-Hermitian input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(OperatorMatrix::hermitian(m), ContractError);
  CHECK_THROWS_AS(eigh(OperatorMatrix::general(m)), ContractError);
}

TEST_CASE("op_func closed forms") {
  const auto e = op_func(OperatorMatrix::zero(3), [](double x) { return std::exp(x); });
  CHECK(max_abs(e.value.entries() - CMatrix::Identity(3, 3)) <= 1e-15);
  const auto s = op_func(diag({1, 4}), [](double x) { return std::sqrt(x); });
  CHECK(max_abs(s.value.entries() - diag({1, 2}).entries()) <= 1e-15);
}

TEST_CASE("log inverts exp for spectra in [-2, 2]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_hermitian(6, rng);
    const double lmax = eigh(a).eigenvalues.cwiseAbs().maxCoeff();
    a = a * (2.0 / lmax);
    const auto ea = op_func(a, [](double x) { return std::exp(x); });
    const auto back = op_func(ea.value, [](double x) { return std::log(x); });
    CHECK(max_abs(back.value.entries() - a.entries()) <= 1e-10);
  }
}

TEST_CASE("exp is positive definite and traces are spectral sums") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const auto a = random_hermitian(7, rng, 2.0);
    const auto ea = op_func(a, [](double x) { return std::exp(x); });
    CHECK(eigh(ea.value).eigenvalues.minCoeff() > 0.0);
    const RVector l = eigh(a).eigenvalues;
    const double expected = l.array().exp().sum();
    CHECK(std::abs(ea.value.trace().real() - expected) <= 1e-12 * expected);
    const auto sq = op_func(a, [](double x) { return x * x; });
    const double expected_sq = l.array().square().sum();
    CHECK(std::abs(sq.value.trace().real() - expected_sq) <= 1e-12 * expected_sq);
  }
}

TEST_CASE("op_func rejects non-finite values and clamps on request") {
  CHECK_THROWS_AS(op_func(diag({1, 0}), [](double x) { return std::log(x); }), DomainError);
  const auto clamped =
      op_func(diag({1, 0}), [](double x) { return std::log(x); }, Clamp::relative_floor);
  CHECK(clamped.clamped == 1);
  CHECK(clamped.value.entries()(1, 1).real() == doctest::Approx(std::log(kClampFloor)));
}

TEST_CASE("commutator norms") {
  CHECK(commutator_norm(pauli::z(), pauli::z()) == 0.0);
  CHECK(commutator_norm(pauli::x(), pauli::z()) == doctest::Approx(2.0).epsilon(1e-15));
  const auto spec = build_xx_chain(4, 1.0, 0.3, Side::A);
  CHECK(commutator_norm(spec.hamiltonian, spec.shared_charges[0].op) <= 1e-12);
}

TEST_CASE("embed closed forms") {
  CHECK(max_abs(embed(pauli::z(), Side::A, 2, 2).entries() - diag({1, 1, -1, -1}).entries()) ==
        0.0);
  CHECK(max_abs(embed(OperatorMatrix::identity(2), Side::B, 2, 2).entries() -
                CMatrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("embedded local spectra add pairwise") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ha = random_hermitian(2, rng);
    const auto hb = random_hermitian(2, rng);
    const RVector la = sorted_spectrum(ha);
    const RVector lb = sorted_spectrum(hb);
    std::vector<double> sums;
    for (const double x : la) {
      for (const double y : lb) sums.push_back(x + y);
    }
    std::sort(sums.begin(), sums.end());
    const RVector joint = sorted_spectrum(embed(ha, Side::A, 2, 2) + embed(hb, Side::B, 2, 2));
    for (std::size_t i = 0; i < sums.size(); ++i) {
      CHECK(joint(static_cast<Eigen::Index>(i)) == doctest::Approx(sums[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("operators on different sides commute") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_hermitian(3, rng);
    const auto y = random_hermitian(4, rng);
    const auto ex = embed(x, Side::A, 3, 4);
    const auto ey = embed(y, Side::B, 3, 4);
    CHECK(commutator_norm(ex, ey) <= 1e-12 * ex.scale() * ey.scale());
  }
}

}  // TEST_SUITE

TEST_SUITE("models") {

TEST_CASE("single-site XX chain") {
  const auto spec = build_xx_chain(1, 1.0, 0.7, Side::A);
  CHECK(max_abs(spec.hamiltonian.entries() - (0.7 * pauli::z()).entries()) == 0.0);
  CHECK(max_abs(spec.shared_charges[0].op.entries() - (0.5 * pauli::z()).entries()) == 0.0);
  CHECK(commutator_norm(spec.hamiltonian, spec.shared_charges[0].op) == 0.0);
}

TEST_CASE("two-site XX chain spectrum") {
  const RVector l = sorted_spectrum(build_xx_chain(2, 1.0, 0.0, Side::A).hamiltonian);
  const double expected[] = {-1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < 4; ++i) CHECK(l(i) == doctest::Approx(expected[i]).epsilon(1e-14));
  const auto three = build_xx_chain(3, 1.0, 0.4, Side::A);
  CHECK(commutator_norm(three.hamiltonian, three.shared_charges[0].op) <= 1e-12);
}

TEST_CASE("tilted Ising chain") {
  const auto classical = build_tilted_ising_chain(3, 1.0, 0.0, 0.5, Side::A);
  const CMatrix& h = classical.hamiltonian.entries();
  CHECK(max_abs(h - CMatrix(h.diagonal().asDiagonal())) == 0.0);
  for (int s = 0; s < 8; ++s) {
    double e = 0.0;
    int z[3];
    for (int i = 0; i < 3; ++i) z[i] = ((s >> (2 - i)) & 1) ? -1 : 1;
    for (int i = 0; i < 2; ++i) e += z[i] * z[i + 1];
    for (int i = 0; i < 3; ++i) e += 0.5 * z[i];
    CHECK(h(s, s).real() == doctest::Approx(e).epsilon(1e-15));
  }

  // Dense 4x4 oracle for J = 1, hx = 1, hz = 0.5.
  RMatrix oracle = RMatrix::Zero(4, 4);
  const double zz[] = {1, -1, -1, 1};
  const double zsum[] = {2, 0, 0, -2};
  for (int s = 0; s < 4; ++s) oracle(s, s) = zz[s] + 0.5 * zsum[s];
  for (int s = 0; s < 4; ++s) {
    oracle(s, s ^ 1) += 1.0;
    oracle(s, s ^ 2) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(oracle);
  const RVector l = sorted_spectrum(build_tilted_ising_chain(2, 1.0, 1.0, 0.5, Side::A).hamiltonian);
  for (int i = 0; i < 4; ++i) CHECK(l(i) == doctest::Approx(solver.eigenvalues()(i)).epsilon(1e-13));

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto spec = build_tilted_ising_chain(3, testing::uniform(rng, -2, 2),
                                               testing::uniform(rng, -2, 2),
                                               testing::uniform(rng, -2, 2), Side::B);
    CHECK(spec.hamiltonian.is_real());
  }
}

TEST_CASE("charges are verified when added") {
  auto single = build_xx_chain(1, 1.0, 0.0, Side::A);
  CHECK_NOTHROW(add_exclusive_charge(single, "Z1", pauli::z()));

  const auto chain = build_xx_chain(3, 1.0, 0.3, Side::A);
  const auto x_total = pauli::parse_sum("X[0] + X[1] + X[2]", 3);
  try {
    add_shared_charge(chain, "Sx", x_total);
    FAIL("sigma^x total was accepted");
  } catch (const CommutationError& e) {
    CHECK(e.norm() > 0.1);
    CHECK(e.norm() == doctest::Approx(commutator_norm(chain.hamiltonian, x_total)));
  }
  const auto again = add_exclusive_charge(chain, "Mz2", chain.shared_charges[0].op);
  CHECK(again.generator_count() == 3);
  CHECK(again.generator_names() == std::vector<std::string>{"H", "Mz", "Mz2"});
}

TEST_CASE("every built spec has commuting generators") {
  auto spec = build_xx_chain(3, 0.8, -0.2, Side::B);
  spec = add_exclusive_charge(spec, "parity", pauli::parse_sum("Z[0] Z[1] Z[2]", 3));
  const auto gens = spec.generators();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = 0; j < gens.size(); ++j) {
      CHECK(commutator_norm(gens[i], gens[j]) <= 1e-10 * gens[i].scale() * gens[j].scale());
    }
  }
  CHECK_NOTHROW(validate(spec));
}

TEST_CASE("Pauli sums") {
  const auto op = pauli::parse_sum("0.5 * X[last_A] X[first_B] + 0.5 * Y[1_A] Y[B0]", 2, 2);
  const auto expected =
      0.5 * OperatorMatrix::hermitian(CMatrix(pauli::at_site(pauli::x(), 1, 4).entries() *
                                              pauli::at_site(pauli::x(), 2, 4).entries())) +
      0.5 * OperatorMatrix::hermitian(CMatrix(pauli::at_site(pauli::y(), 1, 4).entries() *
                                              pauli::at_site(pauli::y(), 2, 4).entries()));
  CHECK(max_abs(op.entries() - expected.entries()) <= 1e-15);
  CHECK(max_abs(pauli::parse_sum("-Z[0] + 2 Z[first] - 1e-1 * I[0]", 1).entries() -
                (pauli::z() - 0.1 * OperatorMatrix::identity(2)).entries()) <= 1e-15);
  CHECK_THROWS_AS(pauli::parse_sum("X[3]", 2), ContractError);
  CHECK_THROWS_AS(pauli::parse_sum("X[0", 2), ContractError);
  CHECK_THROWS_AS(pauli::parse_sum("Q[0]", 2), ContractError);
  CHECK_THROWS_AS(pauli::parse_sum("X[0] X[first_B]", 2, 2), ContractError);
}

TEST_CASE("composite at zero coupling") {
  const auto a = build_xx_chain(2, 1.0, 0.3, Side::A);
  const auto b = build_xx_chain(2, 0.7, -0.2, Side::B);
  const auto cs = build_composite(a, b, coupling::Exchange{}, 0.0);
  const auto sum = embed(a.hamiltonian, Side::A, 4, 4) + embed(b.hamiltonian, Side::B, 4, 4);
  CHECK(max_abs(cs.total_hamiltonian.entries() - sum.entries()) == 0.0);
  CHECK(verify_assumptions(cs).passed());
}

TEST_CASE("exchange coupling conserves total magnetization, not energy") {
  const auto a = build_xx_chain(2, 1.0, 0.3, Side::A);
  const auto b = build_xx_chain(2, 1.0, 0.5, Side::B);
  const auto cs = build_composite(a, b, coupling::Exchange{}, 1.0);
  CHECK(cs.conservation.shared_charge_norms.at(0) <= 1e-12);
  CHECK(cs.conservation.energy_norm > 1e-3);
  const auto m_total = embed(a.shared_charges[0].op, Side::A, 4, 4) +
                       embed(b.shared_charges[0].op, Side::B, 4, 4);
  for (const double g : {0.0, 0.1, 1.0, 3.0}) {
    const auto total = build_composite(a, b, coupling::Exchange{}, g).total_hamiltonian;
    CHECK(commutator_norm(total, m_total) <= 1e-12 * total.scale());
  }
  CHECK(verify_assumptions(cs).passed());
}

TEST_CASE("total Hamiltonian is affine in g") {
  const auto a = build_tilted_ising_chain(2, 1.0, 0.9, 0.4, Side::A);
  const auto b = build_tilted_ising_chain(2, 1.0, 0.6, 0.8, Side::B);
  for (const auto& kind :
       {CouplingKind{coupling::Exchange{}}, CouplingKind{coupling::Ising{}}}) {
    const auto h1 = build_composite(a, b, kind, 0.3).total_hamiltonian;
    const auto h2 = build_composite(a, b, kind, 0.9).total_hamiltonian;
    const auto hm = build_composite(a, b, kind, 0.6).total_hamiltonian;
    CHECK(max_abs((h1 + h2 - 2.0 * hm).entries()) <= 1e-14);
    CHECK(h1.is_real());
  }
}

TEST_CASE("reality of the coupling is enforced and reported") {
  const auto a = build_xx_chain(1, 1.0, 0.3, Side::A);
  const auto b = build_xx_chain(1, 1.0, 0.3, Side::B);
  const auto y = pauli::parse_sum("Y[0_A]", 1, 1);
  CHECK_THROWS_AS(build_composite(a, b, coupling::Custom{y}, 0.5), TimeReversalError);

  const auto perturbed = pauli::parse_sum("Z[0] + 0.2 Y[0]", 1);
  CHECK_THROWS_AS(build_custom_system(1, perturbed, Side::A), TimeReversalError);
  auto complex_spec = build_xx_chain(1, 1.0, 1.0, Side::A);
  complex_spec.hamiltonian = perturbed;
  complex_spec.shared_charges.clear();
  const auto report = verify_assumptions(complex_spec);
  CHECK_FALSE(report.passed());
  for (const auto& c : report.checks) {
    if (c.name == "A: Im(H)") CHECK(c.value == doctest::Approx(0.2));
  }

  const auto gibbs = build_tilted_ising_chain(2, 1.0, 0.5, 0.5, Side::A);
  CHECK(gibbs.generator_count() == 1);
  CHECK(verify_assumptions(gibbs).passed());
}

TEST_CASE("shared charge names must match across sides") {
  auto a = build_xx_chain(2, 1.0, 0.0, Side::A);
  auto b = build_tilted_ising_chain(2, 1.0, 0.5, 0.5, Side::B);
  CHECK_THROWS_AS(build_composite(a, b, coupling::Exchange{}, 0.5), ContractError);
}

}  // TEST_SUITE
