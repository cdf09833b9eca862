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

#include "heatlab/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <utility>

#include "heatlab/error.hpp"

namespace heatlab {

namespace {

struct Cluster {
  Eigen::Index begin;
  Eigen::Index end;
};

bool is_real(const CMatrix& m) { return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

OutcomeTable simultaneous_eigenbasis(const std::vector<OperatorMatrix>& ops, double tol) {
  if (ops.empty()) throw ContractError("simultaneous_eigenbasis needs at least one operator");
  const std::size_t dim = ops.front().dim();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].dim() != dim) throw DimensionError("operators have different dimensions");
    if (!ops[i].is_hermitian()) throw ContractError("operator " + std::to_string(i) + " is not Hermitian");
    for (std::size_t j = 0; j < i; ++j) {
      const double norm = commutator_norm(ops[i], ops[j]);
      if (norm > tol * std::max(ops[i].scale() * ops[j].scale(), 1e-300)) {
        throw CommutationError("operators " + std::to_string(j) + " and " + std::to_string(i) +
                                   " do not commute: " + std::to_string(norm),
                               norm);
      }
    }
  }

  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix basis = CMatrix::Identity(d, d);
  std::vector<Cluster> clusters{{0, d}};
  for (const auto& op : ops) {
    const double gap = tol * std::max(op.scale(), 1e-300);
    std::vector<Cluster> refined;
    for (const Cluster& cl : clusters) {
      const Eigen::Index width = cl.end - cl.begin;
      if (width == 1) {
        refined.push_back(cl);
        continue;
      }
      const CMatrix vc = basis.middleCols(cl.begin, width);
      CMatrix restricted = vc.adjoint() * op.entries() * vc;
      restricted = 0.5 * (restricted + restricted.adjoint()).eval();
      if (is_real(vc) && op.is_real()) restricted = restricted.real().cast<Complex>();
      const EigenSystem es = eigh(OperatorMatrix::hermitian(std::move(restricted)));
      basis.middleCols(cl.begin, width) = vc * es.eigenvectors;
      Eigen::Index start = 0;
      for (Eigen::Index i = 1; i <= width; ++i) {
        if (i == width || es.eigenvalues(i) - es.eigenvalues(i - 1) > gap) {
          refined.push_back({cl.begin + start, cl.begin + i});
          start = i;
        }
      }
    }
    clusters = std::move(refined);
  }

  OutcomeTable table;
  table.basis = std::move(basis);
  table.tuples.resize(d, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const CMatrix ov = ops[i].entries() * table.basis;
    const double scale = std::max(ops[i].scale(), 1e-300);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double value = table.basis.col(c).dot(ov.col(c)).real();
      table.tuples(c, static_cast<Eigen::Index>(i)) = value;
      const double residual = max_abs(ov.col(c) - value * table.basis.col(c));
      if (residual > 10.0 * tol * scale) {
        throw NumericalError("simultaneous_eigenbasis: column " + std::to_string(c) +
                                 " is not an eigenvector of operator " + std::to_string(i) +
                                 " (residual " + std::to_string(residual) + ")",
                             residual);
      }
    }
  }
  return table;
}

OutcomeTable outcome_table(const SystemSpec& spec) {
  return simultaneous_eigenbasis(spec.generators());
}

OutcomeTable product_table(const OutcomeTable& a, const OutcomeTable& b, std::size_t dim_cap) {
  const std::size_t da = a.size();
  const std::size_t db = b.size();
  if (da > dim_cap / db) {
    throw CapacityError("joint outcome table of dimension " + std::to_string(da * db) +
                        " exceeds cap " + std::to_string(dim_cap));
  }
  const auto na = static_cast<Eigen::Index>(da);
  const auto nb = static_cast<Eigen::Index>(db);
  OutcomeTable out;
  out.basis.resize(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      out.basis.block(i * nb, j * nb, nb, nb) = a.basis(i, j) * b.basis;
    }
  }
  out.tuples.resize(na * nb, a.tuples.cols() + b.tuples.cols());
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) {
      out.tuples.row(i * nb + j) << a.tuples.row(i), b.tuples.row(j);
    }
  }
  return out;
}

RVector initial_probabilities(const GGEState& state, const OutcomeTable& table) {
  if (table.arity() != state.theta.size() || table.size() != state.spec.dim()) {
    throw ContractError("outcome table does not match the GGE state's generators");
  }
  RVector p(static_cast<Eigen::Index>(table.size()));
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    p(c) = std::exp(-table.tuples.row(c).dot(state.theta.values) - state.log_z);
  }
  const double drift = std::abs(p.sum() - 1.0);
  if (drift > 1e-8) {
    throw ContractError("initial probabilities sum to 1 + " + std::to_string(p.sum() - 1.0) +
                        ": outcome table and state disagree");
  }
  return p;
}

Evolution evolve_unitary(const CompositeSystem& cs, double tau) {
  const auto& h = cs.total_hamiltonian;
  if (!h.is_real()) {
    throw TimeReversalError("total Hamiltonian is not real in the computational basis");
  }
  if (!std::isfinite(tau)) throw ContractError("evolution time must be finite");
  Evolution ev;
  ev.tau = tau;
  ev.spectrum = eigh(h);
  const auto d = static_cast<Eigen::Index>(h.dim());
  if (tau == 0.0) {
    ev.unitary = CMatrix::Identity(d, d);
  } else {
    ev.unitary = ev.spectrum.apply([tau](double e) { return std::exp(Complex(0.0, -tau * e)); });
  }
  ev.unitarity_residual = max_abs(ev.unitary.adjoint() * ev.unitary - CMatrix::Identity(d, d));
  ev.symmetry_residual = max_abs(ev.unitary - ev.unitary.transpose());
  if (ev.unitarity_residual > 1e-8) {
    throw NumericalError("evolution operator is not unitary: residual " +
                             std::to_string(ev.unitarity_residual),
                         ev.unitarity_residual);
  }
  return ev;
}

double stochasticity_residual(const RMatrix& t) {
  const double rows = (t.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (t.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

namespace {

RMatrix checked(RMatrix t) {
  const double residual = stochasticity_residual(t);
  if (residual > 1e-8) {
    throw NumericalError("transition matrix is not doubly stochastic: residual " +
                             std::to_string(residual),
                         residual);
  }
  return t;
}

}  // namespace

RMatrix transition_matrix(const CMatrix& unitary, const OutcomeTable& joint) {
  if (static_cast<std::size_t>(unitary.rows()) != joint.size()) {
    throw DimensionError("unitary and outcome table dimensions differ");
  }
  const CMatrix w = joint.basis.adjoint() * unitary * joint.basis;
  return checked(w.cwiseAbs2());
}

RMatrix transition_matrix(const Evolution& evolution, const OutcomeTable& joint) {
  const auto& v = evolution.spectrum.eigenvectors;
  if (static_cast<std::size_t>(v.rows()) != joint.size()) {
    throw DimensionError("evolution and outcome table dimensions differ");
  }
  if (!is_real(v) || !is_real(joint.basis)) return transition_matrix(evolution.unitary, joint);

  const auto d = v.rows();
  const RMatrix y = joint.basis.real().transpose() * v.real();
  RVector phase_re(d);
  RVector phase_im(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex ph = evolution.tau == 0.0
                           ? Complex(1.0, 0.0)
                           : std::exp(Complex(0.0, -evolution.tau * evolution.spectrum.eigenvalues(k)));
    phase_re(k) = ph.real();
    phase_im(k) = ph.imag();
  }
  RMatrix t(d, d);
  RVector prod(d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = m; n < d; ++n) {
      prod = y.row(m).transpose().cwiseProduct(y.row(n).transpose());
      const double re = prod.dot(phase_re);
      const double im = prod.dot(phase_im);
      t(m, n) = re * re + im * im;
      t(n, m) = t(m, n);
    }
  }
  return checked(std::move(t));
}

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::heat_a:
      return "heat_A";
    case Quantity::heat_b:
      return "heat_B";
    default:
      return "sigma";
  }
}

double JointDistribution::total_probability() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.probability;
  return s;
}

RVector JointDistribution::marginal_initial() const {
  RVector out = RVector::Zero(initial_probs.size());
  for (const auto& e : entries) out(static_cast<Eigen::Index>(e.n)) += e.probability;
  return out;
}

std::size_t JointDistribution::find(std::size_t n, std::size_t m) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{n, m},
                                   [](const PairRecord& r, const std::pair<std::size_t, std::size_t>& key) {
                                     return std::pair{r.n, r.m} < key;
                                   });
  if (it != entries.end() && it->n == n && it->m == m) {
    return static_cast<std::size_t>(it - entries.begin());
  }
  return entries.size();
}

namespace {

// Per-outcome bookkeeping shared by enumeration and sampling.
class PairEvaluator {
 public:
  PairEvaluator(const OutcomeTable& a, const OutcomeTable& b, const GeneralizedTemperatures& ta,
                const GeneralizedTemperatures& tb)
      : a_(a), b_(b), db_(b.size()) {
    if (ta.n_shared != tb.n_shared) {
      throw ContractError("sides declare different numbers of shared charges");
    }
    if (a.arity() != ta.size() || b.arity() != tb.size()) {
      throw ContractError("outcome tables do not match the temperature layouts");
    }
    paired_ = static_cast<Eigen::Index>(1 + ta.n_shared);
    delta_beta_ = tb.paired() - ta.paired();
    lambda_ = ta.exclusive();
    alpha_ = tb.exclusive();
    const std::size_t d = a.size() * b.size();
    exponents_.resize(static_cast<Eigen::Index>(d));
    for (std::size_t n = 0; n < d; ++n) {
      exponents_(static_cast<Eigen::Index>(n)) =
          a.tuples.row(ia(n)).dot(ta.values) + b.tuples.row(ib(n)).dot(tb.values);
    }
  }

  PairRecord record(std::size_t n, std::size_t m, double probability) const {
    PairRecord r{n, m, probability, 0.0, 0.0, 0.0};
    r.sigma = exponents_(static_cast<Eigen::Index>(m)) - exponents_(static_cast<Eigen::Index>(n));
    const RVector ea_n = a_.tuples.row(ia(n)).head(paired_);
    const RVector ea_m = a_.tuples.row(ia(m)).head(paired_);
    const RVector eb_n = b_.tuples.row(ib(n)).head(paired_);
    const RVector eb_m = b_.tuples.row(ib(m)).head(paired_);
    const auto nl = lambda_.size();
    const auto na = alpha_.size();
    const double excl =
        -lambda_.dot(a_.tuples.row(ia(n)).tail(nl) - a_.tuples.row(ia(m)).tail(nl)) -
        alpha_.dot(b_.tuples.row(ib(n)).tail(na) - b_.tuples.row(ib(m)).tail(na));
    r.heat_a = delta_beta_.dot(ea_n - ea_m) + excl;
    r.heat_b = delta_beta_.dot(eb_m - eb_n) + excl;
    return r;
  }

  const RVector& exponents() const { return exponents_; }

 private:
  Eigen::Index ia(std::size_t n) const { return static_cast<Eigen::Index>(n / db_); }
  Eigen::Index ib(std::size_t n) const { return static_cast<Eigen::Index>(n % db_); }

  const OutcomeTable& a_;
  const OutcomeTable& b_;
  std::size_t db_;
  Eigen::Index paired_ = 1;
  RVector delta_beta_;
  RVector lambda_;
  RVector alpha_;
  RVector exponents_;
};

RVector joint_initial(const RVector& pa, const RVector& pb) {
  RVector p(pa.size() * pb.size());
  for (Eigen::Index i = 0; i < pa.size(); ++i) {
    for (Eigen::Index j = 0; j < pb.size(); ++j) p(i * pb.size() + j) = pa(i) * pb(j);
  }
  return p;
}

void check_shapes(const RVector& pa, const RVector& pb, const RMatrix& t, const OutcomeTable& a,
                  const OutcomeTable& b) {
  if (static_cast<std::size_t>(pa.size()) != a.size() ||
      static_cast<std::size_t>(pb.size()) != b.size() || t.rows() != t.cols() ||
      static_cast<std::size_t>(t.rows()) != a.size() * b.size()) {
    throw DimensionError("joint distribution inputs have inconsistent dimensions");
  }
}

}  // namespace

JointDistribution joint_distribution(const RVector& pa, const RVector& pb, const RMatrix& t,
                                     const OutcomeTable& table_a, const OutcomeTable& table_b,
                                     const GeneralizedTemperatures& temps_a,
                                     const GeneralizedTemperatures& temps_b) {
  check_shapes(pa, pb, t, table_a, table_b);
  const PairEvaluator eval(table_a, table_b, temps_a, temps_b);
  JointDistribution jd;
  jd.initial_probs = joint_initial(pa, pb);
  jd.exponents = eval.exponents();
  const auto d = static_cast<std::size_t>(t.rows());
  for (std::size_t n = 0; n < d; ++n) {
    const double pn = jd.initial_probs(static_cast<Eigen::Index>(n));
    for (std::size_t m = 0; m < d; ++m) {
      const double tmn = t(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      if (tmn <= kTransitionFloor) continue;
      jd.entries.push_back(eval.record(n, m, pn * tmn));
    }
  }
  return jd;
}

JointDistribution sample_trajectories(const RVector& pa, const RVector& pb, const RMatrix& t,
                                      const OutcomeTable& table_a, const OutcomeTable& table_b,
                                      const GeneralizedTemperatures& temps_a,
                                      const GeneralizedTemperatures& temps_b, std::uint64_t count,
                                      std::uint64_t seed, unsigned threads) {
  if (count < 1) throw ContractError("sample count must be at least 1");
  check_shapes(pa, pb, t, table_a, table_b);
  const PairEvaluator eval(table_a, table_b, temps_a, temps_b);
  const RVector p0 = joint_initial(pa, pb);
  const auto d = static_cast<std::size_t>(t.rows());

  // Cumulative tables: initial outcome, then final outcome per column.
  std::vector<double> cdf0(d);
  std::vector<double> cdf_t(d * d);
  double acc = 0.0;
  for (std::size_t n = 0; n < d; ++n) cdf0[n] = (acc += p0(static_cast<Eigen::Index>(n)));
  for (std::size_t n = 0; n < d; ++n) {
    double col = 0.0;
    for (std::size_t m = 0; m < d; ++m) {
      col += t(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      cdf_t[n * d + m] = col;
    }
  }
  auto draw = [](const double* cdf, std::size_t len, double u) {
    const double target = u * cdf[len - 1];
    const auto it = std::upper_bound(cdf, cdf + len, target);
    return std::min(static_cast<std::size_t>(it - cdf), len - 1);
  };

  constexpr std::uint64_t kBlock = 1 << 14;
  const std::uint64_t n_blocks = (count + kBlock - 1) / kBlock;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
  std::vector<std::vector<std::uint64_t>> counts(threads, std::vector<std::uint64_t>(d * d, 0));

  auto worker = [&](unsigned w) {
    auto& local = counts[w];
    for (std::uint64_t blk = w; blk < n_blocks; blk += threads) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)};
      std::mt19937_64 rng(seq);
      const std::uint64_t len = std::min(kBlock, count - blk * kBlock);
      for (std::uint64_t s = 0; s < len; ++s) {
        const double u0 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const std::size_t n = draw(cdf0.data(), d, u0);
        const std::size_t m = draw(cdf_t.data() + n * d, d, u1);
        ++local[n * d + m];
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  JointDistribution jd;
  jd.initial_probs = p0;
  jd.exponents = eval.exponents();
  jd.sampled = true;
  jd.sample_count = count;
  jd.seed = seed;
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t m = 0; m < d; ++m) {
      std::uint64_t c = 0;
      for (const auto& local : counts) c += local[n * d + m];
      if (c == 0) continue;
      jd.entries.push_back(eval.record(n, m, static_cast<double>(c) / static_cast<double>(count)));
    }
  }
  return jd;
}

std::vector<Atom> binned_distribution(const JointDistribution& jd, Quantity q, double bin_eps) {
  std::vector<std::pair<double, double>> values;
  values.reserve(jd.entries.size());
  double scale = 1.0;
  for (const auto& e : jd.entries) {
    if (e.probability <= 0.0) continue;
    values.emplace_back(e.value(q), e.probability);
    scale = std::max(scale, std::abs(e.value(q)));
  }
  std::sort(values.begin(), values.end());
  const double eps = bin_eps * scale;
  std::vector<Atom> atoms;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    double prob = values[i].second;
    while (j + 1 < values.size() && values[j + 1].first - values[j].first <= eps) {
      ++j;
      prob += values[j].second;
    }
    atoms.push_back({0.5 * (values[i].first + values[j].first), prob});
    i = j + 1;
  }
  return atoms;
}

}  // namespace heatlab
