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

#include "heatlab/models.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "heatlab/error.hpp"

namespace heatlab {

namespace pauli {

OperatorMatrix x() {
  RMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return OperatorMatrix::hermitian(m);
}

OperatorMatrix y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return OperatorMatrix::hermitian(std::move(m));
}

OperatorMatrix z() {
  RMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return OperatorMatrix::hermitian(m);
}

OperatorMatrix at_site(const OperatorMatrix& op, std::size_t site, std::size_t n_sites) {
  if (site >= n_sites) {
    throw DimensionError("site " + std::to_string(site) + " outside chain of " +
                         std::to_string(n_sites) + " sites");
  }
  if (n_sites >= 8 * sizeof(std::size_t) - 1 || (std::size_t{2} << (n_sites - 1)) > kDefaultDimCap) {
    throw CapacityError("chain of " + std::to_string(n_sites) + " sites exceeds dimension cap");
  }
  const std::size_t left = std::size_t{1} << site;
  const std::size_t right = std::size_t{1} << (n_sites - site - 1);
  return kron(kron(OperatorMatrix::identity(left), op), OperatorMatrix::identity(right));
}

namespace {

class SumParser {
 public:
  SumParser(const std::string& text, std::size_t n_a, std::size_t n_b)
      : text_(text), n_a_(n_a), n_b_(n_b), n_total_(n_a + n_b) {}

  OperatorMatrix parse() {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_total_);
    CMatrix acc = CMatrix::Zero(dim, dim);
    skip_space();
    if (at_end()) fail("empty operator expression");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_space();
      } else if (!first) {
        fail("expected '+' or '-' between terms");
      }
      acc += sign * term();
      first = false;
      skip_space();
    }
    return OperatorMatrix::hermitian(std::move(acc));
  }

 private:
  CMatrix term() {
    double coeff = 1.0;
    bool have_coeff = false;
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
      coeff = number();
      have_coeff = true;
      skip_space();
      if (peek() == '*') {
        ++pos_;
        skip_space();
      }
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_total_);
    CMatrix product = CMatrix::Identity(dim, dim);
    bool have_factor = false;
    while (!at_end() && std::string("XYZI").find(peek()) != std::string::npos) {
      const char p = peek();
      ++pos_;
      expect('[');
      const std::size_t site = label();
      expect(']');
      product = product * factor(p, site);
      have_factor = true;
      skip_space();
      if (peek() == '*') {
        ++pos_;
        skip_space();
      }
    }
    if (!have_coeff && !have_factor) fail("expected a coefficient or Pauli factor");
    return coeff * product;
  }

  CMatrix factor(char p, std::size_t site) const {
    switch (p) {
      case 'X':
        return at_site(x(), site, n_total_).entries();
      case 'Y':
        return at_site(y(), site, n_total_).entries();
      case 'Z':
        return at_site(z(), site, n_total_).entries();
      default:
        return at_site(OperatorMatrix::identity(2), site, n_total_).entries();
    }
  }

  std::size_t label() {
    skip_space();
    std::string tok;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      tok += peek();
      ++pos_;
    }
    skip_space();
    if (tok.empty()) fail("expected a site label");

    // Split off the chain designator.
    std::string side;
    std::string core = tok;
    if (tok.size() > 2 && (tok.ends_with("_A") || tok.ends_with("_B"))) {
      side = tok.substr(tok.size() - 1);
      core = tok.substr(0, tok.size() - 2);
    } else if (tok.size() > 1 && (tok[0] == 'A' || tok[0] == 'B') &&
               std::isdigit(static_cast<unsigned char>(tok[1]))) {
      side = tok.substr(0, 1);
      core = tok.substr(1);
    }
    if (n_b_ == 0 && !side.empty()) fail("label '" + tok + "' names a chain in a single-chain expression");
    if (n_b_ > 0 && side.empty()) fail("label '" + tok + "' must name chain A or B");

    const std::size_t n_chain = side == "B" ? n_b_ : n_a_;
    std::size_t local = 0;
    if (core == "first") {
      local = 0;
    } else if (core == "last") {
      local = n_chain - 1;
    } else if (std::all_of(core.begin(), core.end(),
                           [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      local = static_cast<std::size_t>(std::stoul(core));
      if (local >= n_chain) fail("site '" + tok + "' is outside its chain");
    } else {
      fail("unknown site label '" + tok + "'");
    }
    return side == "B" ? n_a_ + local : local;
  }

  double number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ContractError("pauli expression \"" + text_ + "\" at column " +
                        std::to_string(pos_ + 1) + ": " + msg);
  }

  const std::string& text_;
  std::size_t n_a_;
  std::size_t n_b_;
  std::size_t n_total_;
  std::size_t pos_ = 0;
};

}  // namespace

OperatorMatrix parse_sum(const std::string& text, std::size_t n_sites_a, std::size_t n_sites_b) {
  if (n_sites_a == 0) throw ContractError("pauli expression needs at least one site");
  if ((std::size_t{1} << (n_sites_a + n_sites_b)) > kDefaultDimCap) {
    throw CapacityError("pauli expression on " + std::to_string(n_sites_a + n_sites_b) +
                        " sites exceeds dimension cap");
  }
  return SumParser(text, n_sites_a, n_sites_b).parse();
}

}  // namespace pauli

std::vector<OperatorMatrix> SystemSpec::generators() const {
  std::vector<OperatorMatrix> out{hamiltonian};
  for (const auto& c : shared_charges) out.push_back(c.op);
  for (const auto& c : exclusive_charges) out.push_back(c.op);
  return out;
}

std::vector<std::string> SystemSpec::generator_names() const {
  std::vector<std::string> out{"H"};
  for (const auto& c : shared_charges) out.push_back(c.name);
  for (const auto& c : exclusive_charges) out.push_back(c.name);
  return out;
}

namespace {

const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

double commutation_tolerance(const OperatorMatrix& a, const OperatorMatrix& b) {
  return kCommutationTolerance * std::max(a.scale() * b.scale(), 1e-300);
}

void require_dims(std::size_t n_sites) {
  if (n_sites < 1) throw ContractError("chain needs n_sites >= 1");
  if (n_sites > 12 || (std::size_t{1} << n_sites) > kDefaultDimCap) {
    throw CapacityError("chain of " + std::to_string(n_sites) + " sites exceeds dimension cap " +
                        std::to_string(kDefaultDimCap));
  }
}

SystemSpec add_charge(SystemSpec spec, std::string name, const OperatorMatrix& op,
                      bool exclusive) {
  if (op.dim() != spec.dim()) {
    throw DimensionError("charge '" + name + "' has dimension " + std::to_string(op.dim()) +
                         ", system has " + std::to_string(spec.dim()));
  }
  if (!op.is_hermitian()) throw ContractError("charge '" + name + "' is not Hermitian");
  const auto gens = spec.generators();
  const auto names = spec.generator_names();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const double norm = commutator_norm(op, gens[i]);
    if (norm > commutation_tolerance(op, gens[i])) {
      throw CommutationError("charge '" + name + "' does not commute with '" + names[i] +
                                 "' on side " + side_name(spec.label) +
                                 ": max|[.,.]| = " + std::to_string(norm),
                             norm);
    }
  }
  auto& list = exclusive ? spec.exclusive_charges : spec.shared_charges;
  list.push_back({std::move(name), op});
  return spec;
}

}  // namespace

void validate(const SystemSpec& spec) {
  const std::size_t dim = std::size_t{1} << spec.n_sites;
  if (spec.local_dim != 2 || spec.dim() != dim) {
    throw DimensionError("system on side " + std::string(side_name(spec.label)) +
                         " has inconsistent dimension");
  }
  if (!spec.hamiltonian.is_real()) {
    throw TimeReversalError("Hamiltonian of side " + std::string(side_name(spec.label)) +
                            " is not real in the computational basis");
  }
  const auto gens = spec.generators();
  const auto names = spec.generator_names();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (gens[i].dim() != dim) throw DimensionError("generator '" + names[i] + "' has wrong dimension");
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      const double norm = commutator_norm(gens[i], gens[j]);
      if (norm > commutation_tolerance(gens[i], gens[j])) {
        throw CommutationError("'" + names[i] + "' and '" + names[j] + "' do not commute: " +
                                   std::to_string(norm),
                               norm);
      }
    }
  }
}

SystemSpec build_xx_chain(std::size_t n_sites, double coupling, double field, Side label) {
  require_dims(n_sites);
  const std::size_t dim = std::size_t{1} << n_sites;
  OperatorMatrix h = OperatorMatrix::zero(dim);
  OperatorMatrix mz = OperatorMatrix::zero(dim);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const auto zi = pauli::at_site(pauli::z(), i, n_sites);
    h = h + field * zi;
    mz = mz + 0.5 * zi;
    if (i + 1 < n_sites) {
      const CMatrix xx = pauli::at_site(pauli::x(), i, n_sites) *
                         pauli::at_site(pauli::x(), i + 1, n_sites);
      const CMatrix yy = pauli::at_site(pauli::y(), i, n_sites) *
                         pauli::at_site(pauli::y(), i + 1, n_sites);
      h = h + OperatorMatrix::hermitian(CMatrix(0.5 * coupling * (xx + yy)));
    }
  }
  SystemSpec spec;
  spec.label = label;
  spec.model = "xx";
  spec.n_sites = n_sites;
  spec.hamiltonian = h;
  spec.shared_charges.push_back({"Mz", mz});
  validate(spec);
  return spec;
}

SystemSpec build_tilted_ising_chain(std::size_t n_sites, double coupling, double hx, double hz,
                                    Side label) {
  require_dims(n_sites);
  const std::size_t dim = std::size_t{1} << n_sites;
  OperatorMatrix h = OperatorMatrix::zero(dim);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const auto zi = pauli::at_site(pauli::z(), i, n_sites);
    h = h + hx * pauli::at_site(pauli::x(), i, n_sites) + hz * zi;
    if (i + 1 < n_sites) {
      h = h + OperatorMatrix::hermitian(
                  CMatrix(coupling * (zi * pauli::at_site(pauli::z(), i + 1, n_sites))));
    }
  }
  SystemSpec spec;
  spec.label = label;
  spec.model = "tilted_ising";
  spec.n_sites = n_sites;
  spec.hamiltonian = h;
  validate(spec);
  return spec;
}

SystemSpec build_custom_system(std::size_t n_sites, const OperatorMatrix& hamiltonian, Side label,
                               std::string model) {
  require_dims(n_sites);
  SystemSpec spec;
  spec.label = label;
  spec.model = std::move(model);
  spec.n_sites = n_sites;
  spec.hamiltonian = hamiltonian;
  validate(spec);
  return spec;
}

SystemSpec add_exclusive_charge(SystemSpec spec, std::string name, const OperatorMatrix& op) {
  return add_charge(std::move(spec), std::move(name), op, true);
}

SystemSpec add_shared_charge(SystemSpec spec, std::string name, const OperatorMatrix& op) {
  return add_charge(std::move(spec), std::move(name), op, false);
}

std::string coupling_name(const CouplingKind& kind) {
  if (std::holds_alternative<coupling::Exchange>(kind)) return "exchange";
  if (std::holds_alternative<coupling::Ising>(kind)) return "ising";
  return "custom";
}

CompositeSystem build_composite(const SystemSpec& spec_a, const SystemSpec& spec_b,
                                const CouplingKind& kind, double g, std::size_t dim_cap) {
  if (spec_a.shared_charges.size() != spec_b.shared_charges.size()) {
    throw ContractError("shared charge lists differ in length: " +
                        std::to_string(spec_a.shared_charges.size()) + " vs " +
                        std::to_string(spec_b.shared_charges.size()));
  }
  for (std::size_t k = 0; k < spec_a.shared_charges.size(); ++k) {
    if (spec_a.shared_charges[k].name != spec_b.shared_charges[k].name) {
      throw ContractError("shared charge " + std::to_string(k) + " is named '" +
                          spec_a.shared_charges[k].name + "' on A but '" +
                          spec_b.shared_charges[k].name + "' on B");
    }
  }
  const std::size_t da = spec_a.dim();
  const std::size_t db = spec_b.dim();
  if (da > dim_cap / db) {
    throw CapacityError("joint dimension " + std::to_string(da * db) + " exceeds cap " +
                        std::to_string(dim_cap));
  }

  const std::size_t n_total = spec_a.n_sites + spec_b.n_sites;
  const std::size_t last_a = spec_a.n_sites - 1;
  const std::size_t first_b = spec_a.n_sites;
  OperatorMatrix hab = OperatorMatrix::zero(da * db);
  if (std::holds_alternative<coupling::Exchange>(kind)) {
    const CMatrix xx = pauli::at_site(pauli::x(), last_a, n_total) *
                       pauli::at_site(pauli::x(), first_b, n_total);
    const CMatrix yy = pauli::at_site(pauli::y(), last_a, n_total) *
                       pauli::at_site(pauli::y(), first_b, n_total);
    hab = OperatorMatrix::hermitian(CMatrix(0.5 * (xx + yy)));
  } else if (std::holds_alternative<coupling::Ising>(kind)) {
    hab = OperatorMatrix::hermitian(CMatrix(pauli::at_site(pauli::z(), last_a, n_total) *
                                            pauli::at_site(pauli::z(), first_b, n_total)));
  } else {
    hab = std::get<coupling::Custom>(kind).op;
    if (hab.dim() != da * db) {
      throw DimensionError("custom coupling has dimension " + std::to_string(hab.dim()) +
                           ", joint space has " + std::to_string(da * db));
    }
    if (!hab.is_hermitian()) throw ContractError("custom coupling is not Hermitian");
  }
  if (!hab.is_real()) {
    throw TimeReversalError("coupling is not real in the computational basis (max|Im| = " +
                            std::to_string(hab.imag_residual()) + ")");
  }

  CompositeSystem cs{spec_a, spec_b, kind, hab, g, OperatorMatrix::identity(1), {}};
  const auto ha = embed(spec_a.hamiltonian, Side::A, da, db, dim_cap);
  const auto hb = embed(spec_b.hamiltonian, Side::B, da, db, dim_cap);
  cs.total_hamiltonian = ha + hb + g * hab;

  for (std::size_t k = 0; k < spec_a.shared_charges.size(); ++k) {
    const auto total = embed(spec_a.shared_charges[k].op, Side::A, da, db, dim_cap) +
                       embed(spec_b.shared_charges[k].op, Side::B, da, db, dim_cap);
    cs.conservation.shared_charge_norms.push_back(commutator_norm(hab, total));
  }
  cs.conservation.energy_norm = commutator_norm(hab, ha + hb);
  return cs;
}

bool AssumptionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

void append_side_checks(const SystemSpec& spec, AssumptionReport& report) {
  const std::string side = side_name(spec.label);
  const auto gens = spec.generators();
  const auto names = spec.generator_names();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      const double norm = commutator_norm(gens[i], gens[j]);
      const double tol = commutation_tolerance(gens[i], gens[j]);
      report.checks.push_back({side + ": [" + names[i] + ", " + names[j] + "]", norm, tol,
                               norm <= tol});
    }
  }
  const double imag = spec.hamiltonian.imag_residual();
  const double tol = kFlagTolerance * std::max(spec.hamiltonian.scale(), 1e-300);
  report.checks.push_back({side + ": Im(H)", imag, tol, imag <= tol});
}

}  // namespace

AssumptionReport verify_assumptions(const SystemSpec& spec) {
  AssumptionReport report;
  append_side_checks(spec, report);
  return report;
}

AssumptionReport verify_assumptions(const CompositeSystem& cs) {
  AssumptionReport report;
  append_side_checks(cs.spec_a, report);
  append_side_checks(cs.spec_b, report);
  const double tol_ab = kFlagTolerance * std::max(cs.coupling.scale(), 1e-300);
  report.checks.push_back(
      {"Im(H_AB)", cs.coupling.imag_residual(), tol_ab, cs.coupling.imag_residual() <= tol_ab});
  const double tol_total = kFlagTolerance * std::max(cs.total_hamiltonian.scale(), 1e-300);
  report.checks.push_back({"Im(H_total)", cs.total_hamiltonian.imag_residual(), tol_total,
                           cs.total_hamiltonian.imag_residual() <= tol_total});
  const double herm = max_abs(cs.total_hamiltonian.entries() - cs.total_hamiltonian.entries().adjoint());
  report.checks.push_back({"H_total - H_total^dagger", herm, tol_total, herm <= tol_total});
  return report;
}

}  // namespace heatlab
