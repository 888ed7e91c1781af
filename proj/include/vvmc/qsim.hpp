#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "vvmc/distribution.hpp"
#include "vvmc/rng.hpp"
#include "vvmc/spaces.hpp"

namespace vvmc {

using Amp = std::complex<double>;
using AmpMap = std::unordered_map<std::uint64_t, Amp>;

inline constexpr double kAmpPrune = 1e-15;

class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violation of a structural precondition (non-injective permutation, prepared
// column applied off its source state, and the like).
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Wires are numbered from the most significant bit: wire 0 contributes
// 2^(m-1) to the basis index.  A register is a contiguous wire range.
inline std::uint64_t reg_get(std::uint64_t idx, int m, int first, int width) {
  return (idx >> (m - first - width)) & ((std::uint64_t{1} << width) - 1);
}

inline std::uint64_t reg_set(std::uint64_t idx, int m, int first, int width,
                             std::uint64_t value) {
  const int shift = m - first - width;
  const std::uint64_t mask = ((std::uint64_t{1} << width) - 1) << shift;
  return (idx & ~mask) | ((value << shift) & mask);
}

inline std::uint64_t wire_mask(int m, int wire) {
  return std::uint64_t{1} << (m - 1 - wire);
}

// ---------------------------------------------------------------------------
// Sparse state vector over m wires.
// ---------------------------------------------------------------------------

class QState {
 public:
  QState() = default;

  static QState basis(int m, std::uint64_t idx) {
    AmpMap amps;
    amps.emplace(idx, Amp{1.0, 0.0});
    return from_amplitudes(m, std::move(amps));
  }

  static QState from_amplitudes(int m, AmpMap amps, double norm_tol = 1e-10) {
    if (m < 1 || m > 62) throw std::invalid_argument("QState: wire count out of range");
    const std::uint64_t lim = std::uint64_t{1} << m;
    NeumaierSum n2;
    for (auto it = amps.begin(); it != amps.end();) {
      if (it->first >= lim) throw std::invalid_argument("QState: index out of range");
      if (std::abs(it->second) < kAmpPrune) {
        it = amps.erase(it);
      } else {
        n2.add(std::norm(it->second));
        ++it;
      }
    }
    if (std::abs(n2.value() - 1.0) > norm_tol)
      throw std::invalid_argument("QState: amplitudes are not normalized");
    QState s;
    s.m_ = m;
    s.amps_ = std::move(amps);
    return s;
  }

  int qubits() const { return m_; }
  const AmpMap& amplitudes() const { return amps_; }

  double norm_sq() const {
    NeumaierSum n2;
    for (const auto& [idx, a] : amps_) n2.add(std::norm(a));
    return n2.value();
  }

 private:
  int m_ = 0;
  AmpMap amps_;
};

// ---------------------------------------------------------------------------
// Query operator.  On basis state |i>|x>|y> (an m_in-wire input register, an
// m_val-wire value register, the rest untouched) it adds the coded function
// value into x when i is active:
//   |i>|x>|y> -> |i>|x + code(f(node(i))) mod 2^m_val>|y>.
// Inactive i pass through unchanged.
// ---------------------------------------------------------------------------

struct QuantumQuery {
  int m = 2, m_in = 1, m_val = 1;
  std::vector<std::uint64_t> active;  // sorted, duplicate-free
  std::function<std::int64_t(std::uint64_t)> node;
  std::function<std::uint64_t(const VecX&)> value_code;
};

inline QuantumQuery make_query(int m, int m_in, int m_val, std::vector<std::uint64_t> active,
                               std::function<std::int64_t(std::uint64_t)> node,
                               std::function<std::uint64_t(const VecX&)> value_code) {
  if (m_in < 1 || m_val < 1) throw std::invalid_argument("QuantumQuery: empty register");
  if (m < m_in + m_val || m > 62)
    throw std::invalid_argument("QuantumQuery: registers do not fit the wire count");
  std::sort(active.begin(), active.end());
  if (std::adjacent_find(active.begin(), active.end()) != active.end())
    throw std::invalid_argument("QuantumQuery: duplicate active indices");
  const std::uint64_t lim = std::uint64_t{1} << m_in;
  for (std::uint64_t i : active)
    if (i >= lim) throw std::invalid_argument("QuantumQuery: active index out of range");
  if (!node || !value_code) throw std::invalid_argument("QuantumQuery: missing maps");
  return QuantumQuery{m, m_in, m_val, std::move(active), std::move(node),
                      std::move(value_code)};
}

inline QState apply_query(const QuantumQuery& q, const TabFn& f, const QState& s) {
  if (s.qubits() != q.m) throw std::invalid_argument("apply_query: wire count mismatch");
  const std::uint64_t vmask = (std::uint64_t{1} << q.m_val) - 1;
  AmpMap out;
  out.reserve(s.amplitudes().size());
  for (const auto& [idx, a] : s.amplitudes()) {
    const std::uint64_t i = reg_get(idx, q.m, 0, q.m_in);
    if (!std::binary_search(q.active.begin(), q.active.end(), i)) {
      out.emplace(idx, a);
      continue;
    }
    const std::int64_t t = q.node(i);
    const std::uint64_t code = q.value_code(f.at(t));
    if (code > vmask) throw contract_error("apply_query: value code exceeds the register");
    const std::uint64_t x = reg_get(idx, q.m, q.m_in, q.m_val);
    out.emplace(reg_set(idx, q.m, q.m_in, q.m_val, (x + code) & vmask), a);
  }
  return QState::from_amplitudes(q.m, std::move(out));
}

// ---------------------------------------------------------------------------
// Unitaries, restricted to shapes whose unitarity is verifiable:
// basis permutations, a prepared column, single-qubit gates, controlled
// blocks, the inverse Fourier transform on a register, and compositions.
// ---------------------------------------------------------------------------

struct UnitarySpec;

struct BasisPermutation {
  std::function<std::uint64_t(std::uint64_t)> map;                 // used when no table
  std::shared_ptr<const std::vector<std::uint64_t>> table;         // validated bijection
};

struct PreparedColumn {
  std::uint64_t source = 0;
  std::vector<std::pair<std::uint64_t, Amp>> column;  // unit norm, distinct indices
};

struct SingleQubitGate {
  int wire = 0;
  std::array<Amp, 4> u{};  // row-major 2x2
};

struct ControlledGate {
  std::vector<int> controls;
  std::shared_ptr<const UnitarySpec> inner;
};

struct InverseQft {
  int first = 0;
  int count = 1;
};

struct Composite {
  std::vector<UnitarySpec> steps;
};

struct UnitarySpec {
  std::variant<BasisPermutation, PreparedColumn, SingleQubitGate, ControlledGate, InverseQft,
               Composite>
      op;
};

inline UnitarySpec make_permutation(std::function<std::uint64_t(std::uint64_t)> map) {
  if (!map) throw std::invalid_argument("BasisPermutation: missing map");
  return UnitarySpec{BasisPermutation{std::move(map), nullptr}};
}

inline UnitarySpec make_permutation_table(std::vector<std::uint64_t> table) {
  std::vector<bool> seen(table.size(), false);
  for (std::uint64_t v : table) {
    if (v >= table.size() || seen[v])
      throw std::invalid_argument("BasisPermutation: table is not a bijection");
    seen[v] = true;
  }
  auto shared = std::make_shared<const std::vector<std::uint64_t>>(std::move(table));
  return UnitarySpec{BasisPermutation{nullptr, std::move(shared)}};
}

inline UnitarySpec identity_unitary() {
  return make_permutation([](std::uint64_t i) { return i; });
}

inline UnitarySpec make_prepared_column(std::uint64_t source,
                                        std::vector<std::pair<std::uint64_t, Amp>> column) {
  if (column.empty()) throw std::invalid_argument("PreparedColumn: empty column");
  std::vector<std::uint64_t> idxs;
  NeumaierSum n2;
  for (const auto& [j, c] : column) {
    idxs.push_back(j);
    n2.add(std::norm(c));
  }
  std::sort(idxs.begin(), idxs.end());
  if (std::adjacent_find(idxs.begin(), idxs.end()) != idxs.end())
    throw std::invalid_argument("PreparedColumn: duplicate indices");
  if (std::abs(n2.value() - 1.0) > 1e-12)
    throw std::invalid_argument("PreparedColumn: column is not unit norm");
  return UnitarySpec{PreparedColumn{source, std::move(column)}};
}

inline UnitarySpec make_single_qubit(int wire, std::array<Amp, 4> u) {
  // U U^dagger = I within 1e-12.
  const Amp r00 = u[0] * std::conj(u[0]) + u[1] * std::conj(u[1]);
  const Amp r01 = u[0] * std::conj(u[2]) + u[1] * std::conj(u[3]);
  const Amp r11 = u[2] * std::conj(u[2]) + u[3] * std::conj(u[3]);
  if (std::abs(r00 - 1.0) > 1e-12 || std::abs(r11 - 1.0) > 1e-12 || std::abs(r01) > 1e-12)
    throw std::invalid_argument("SingleQubitGate: matrix is not unitary");
  return UnitarySpec{SingleQubitGate{wire, u}};
}

inline UnitarySpec make_controlled(std::vector<int> controls, UnitarySpec inner) {
  if (controls.empty()) throw std::invalid_argument("ControlledGate: no control wires");
  std::sort(controls.begin(), controls.end());
  if (std::adjacent_find(controls.begin(), controls.end()) != controls.end())
    throw std::invalid_argument("ControlledGate: duplicate control wires");
  return UnitarySpec{ControlledGate{
      std::move(controls), std::make_shared<const UnitarySpec>(std::move(inner))}};
}

inline UnitarySpec make_inverse_qft(int first, int count) {
  if (first < 0 || count < 1) throw std::invalid_argument("InverseQft: bad register");
  return UnitarySpec{InverseQft{first, count}};
}

inline UnitarySpec make_composite(std::vector<UnitarySpec> steps) {
  return UnitarySpec{Composite{std::move(steps)}};
}

namespace gates {

inline UnitarySpec hadamard(int wire) {
  const double s = std::numbers::sqrt2 / 2.0;
  return make_single_qubit(wire, {Amp{s, 0}, Amp{s, 0}, Amp{s, 0}, Amp{-s, 0}});
}

inline UnitarySpec pauli_x(int wire) {
  return make_single_qubit(wire, {Amp{0, 0}, Amp{1, 0}, Amp{1, 0}, Amp{0, 0}});
}

inline UnitarySpec pauli_z(int wire) {
  return make_single_qubit(wire, {Amp{1, 0}, Amp{0, 0}, Amp{0, 0}, Amp{-1, 0}});
}

inline UnitarySpec cnot(int control, int target) {
  return make_controlled({control}, pauli_x(target));
}

// Phase -1 exactly when every listed wire is 1 (symmetric in the wires).
inline UnitarySpec mcz(std::vector<int> wires) {
  if (wires.empty()) throw std::invalid_argument("mcz: no wires");
  const int target = wires.back();
  wires.pop_back();
  if (wires.empty()) return pauli_z(target);
  return make_controlled(std::move(wires), pauli_z(target));
}

}  // namespace gates

// ---------------------------------------------------------------------------
// Application engine.  Works on raw amplitude maps so controlled blocks can
// act linearly on unnormalized slices of the state.
// ---------------------------------------------------------------------------

namespace detail {

inline void emit(AmpMap& out, std::uint64_t idx, const Amp& a) {
  if (std::abs(a) >= kAmpPrune) out[idx] += a;
}

inline void apply_spec(const UnitarySpec& u, int m, AmpMap& amps);

inline void apply_permutation(const BasisPermutation& g, int m, AmpMap& amps) {
  const std::uint64_t lim = std::uint64_t{1} << m;
  if (g.table && g.table->size() != lim)
    throw std::invalid_argument("BasisPermutation: table size does not match wire count");
  AmpMap out;
  out.reserve(amps.size());
  for (const auto& [idx, a] : amps) {
    const std::uint64_t j = g.table ? (*g.table)[idx] : g.map(idx);
    if (j >= lim) throw contract_error("BasisPermutation: image outside the index range");
    if (!out.emplace(j, a).second)
      throw contract_error("BasisPermutation: not injective on the support");
  }
  amps = std::move(out);
}

inline void apply_prepared(const PreparedColumn& g, int m, AmpMap& amps) {
  const std::uint64_t lim = std::uint64_t{1} << m;
  if (amps.size() != 1) throw contract_error("PreparedColumn: state is not a basis state");
  const auto& [idx, a] = *amps.begin();
  if (idx != g.source) throw contract_error("PreparedColumn: state is not the source state");
  if (std::abs(std::abs(a) - 1.0) > 1e-9)
    throw contract_error("PreparedColumn: source amplitude is not a phase");
  AmpMap out;
  out.reserve(g.column.size());
  for (const auto& [j, c] : g.column) {
    if (j >= lim) throw contract_error("PreparedColumn: index outside the wire range");
    emit(out, j, a * c);
  }
  amps = std::move(out);
}

inline void apply_single(const SingleQubitGate& g, int m, AmpMap& amps) {
  if (g.wire < 0 || g.wire >= m) throw std::invalid_argument("SingleQubitGate: wire out of range");
  const std::uint64_t bit = wire_mask(m, g.wire);
  AmpMap out;
  out.reserve(amps.size() * 2);
  for (const auto& [idx, a] : amps) {
    if (idx & bit) {
      if (amps.count(idx ^ bit)) continue;  // pair handled from its 0-side
      emit(out, idx ^ bit, g.u[1] * a);
      emit(out, idx, g.u[3] * a);
    } else {
      Amp a1{0.0, 0.0};
      if (auto it = amps.find(idx | bit); it != amps.end()) a1 = it->second;
      emit(out, idx, g.u[0] * a + g.u[1] * a1);
      emit(out, idx | bit, g.u[2] * a + g.u[3] * a1);
    }
  }
  amps = std::move(out);
}

inline void apply_controlled(const ControlledGate& g, int m, AmpMap& amps) {
  std::uint64_t cmask = 0;
  for (int w : g.controls) {
    if (w < 0 || w >= m) throw std::invalid_argument("ControlledGate: wire out of range");
    cmask |= wire_mask(m, w);
  }
  AmpMap sub, rest;
  for (const auto& [idx, a] : amps) {
    if ((idx & cmask) == cmask)
      sub.emplace(idx, a);
    else
      rest.emplace(idx, a);
  }
  apply_spec(*g.inner, m, sub);
  for (const auto& [idx, a] : sub) {
    if ((idx & cmask) != cmask)
      throw contract_error("ControlledGate: inner block moved a control wire");
    emit(rest, idx, a);
  }
  amps = std::move(rest);
}

inline void apply_iqft(const InverseQft& g, int m, AmpMap& amps) {
  if (g.first < 0 || g.first + g.count > m)
    throw std::invalid_argument("InverseQft: register out of range");
  const std::uint64_t M = std::uint64_t{1} << g.count;
  // |y> -> M^(-1/2) sum_w exp(-2 pi i w y / M) |w>, separately per value of
  // the untouched wires.  Ordered grouping keeps accumulation deterministic.
  std::map<std::uint64_t, std::vector<Amp>> groups;
  for (const auto& [idx, a] : amps) {
    const std::uint64_t y = reg_get(idx, m, g.first, g.count);
    const std::uint64_t base = reg_set(idx, m, g.first, g.count, 0);
    auto& v = groups[base];
    if (v.empty()) v.resize(M);
    v[y] += a;
  }
  std::vector<Amp> twiddle(M);
  for (std::uint64_t k = 0; k < M; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    twiddle[k] = Amp{std::cos(ang), std::sin(ang)};
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  AmpMap out;
  out.reserve(groups.size() * M);
  for (const auto& [base, v] : groups) {
    for (std::uint64_t w = 0; w < M; ++w) {
      Amp s{0.0, 0.0};
      for (std::uint64_t y = 0; y < M; ++y) {
        if (v[y] != Amp{0.0, 0.0}) s += v[y] * twiddle[(w * y) % M];
      }
      emit(out, reg_set(base, m, g.first, g.count, w), s * scale);
    }
  }
  amps = std::move(out);
}

inline void apply_spec(const UnitarySpec& u, int m, AmpMap& amps) {
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, BasisPermutation>) {
          apply_permutation(g, m, amps);
        } else if constexpr (std::is_same_v<T, PreparedColumn>) {
          apply_prepared(g, m, amps);
        } else if constexpr (std::is_same_v<T, SingleQubitGate>) {
          apply_single(g, m, amps);
        } else if constexpr (std::is_same_v<T, ControlledGate>) {
          apply_controlled(g, m, amps);
        } else if constexpr (std::is_same_v<T, InverseQft>) {
          apply_iqft(g, m, amps);
        } else {
          for (const UnitarySpec& st : g.steps) apply_spec(st, m, amps);
        }
      },
      u.op);
}

}  // namespace detail

inline QState apply_unitary(const UnitarySpec& u, const QState& s) {
  AmpMap amps = s.amplitudes();
  detail::apply_spec(u, s.qubits(), amps);
  return QState::from_amplitudes(s.qubits(), std::move(amps));
}

// ---------------------------------------------------------------------------
// Full algorithm: one query operator, n+1 unitaries, a start state, and an
// output map from measured indices to values.
// ---------------------------------------------------------------------------

struct QuantumAlgorithm {
  QuantumQuery query;
  std::vector<UnitarySpec> unitaries;
  std::uint64_t start = 0;
  std::function<VecX(std::uint64_t)> output;

  int query_count() const { return static_cast<int>(unitaries.size()) - 1; }
};

inline QuantumAlgorithm make_quantum_alg(QuantumQuery query, std::vector<UnitarySpec> unitaries,
                                         std::uint64_t start,
                                         std::function<VecX(std::uint64_t)> output) {
  if (unitaries.empty()) throw std::invalid_argument("QuantumAlgorithm: needs >= 1 unitary");
  if (start >= (std::uint64_t{1} << query.m))
    throw std::invalid_argument("QuantumAlgorithm: start index out of range");
  if (!output) throw std::invalid_argument("QuantumAlgorithm: missing output map");
  return QuantumAlgorithm{std::move(query), std::move(unitaries), start, std::move(output)};
}

struct RunOptions {
  int max_qubits = 24;
  double group_tol = 1e-12;
};

inline QState run_state(const QuantumAlgorithm& alg, const TabFn& f,
                        const RunOptions& opt = {}) {
  const int m = alg.query.m;
  if (m > opt.max_qubits)
    throw resource_error("simulation needs " + std::to_string(m) + " wires, cap is " +
                         std::to_string(opt.max_qubits));
  QState s = QState::basis(m, alg.start);
  const int n = alg.query_count();
  for (int k = 0; k <= n; ++k) {
    s = apply_unitary(alg.unitaries[static_cast<std::size_t>(k)], s);
    if (k < n) s = apply_query(alg.query, f, s);
  }
  return s;
}

// Exact output distribution, grouped by value, probabilities validated to sum
// to 1 within 1e-9.
inline std::vector<Outcome> run_exact(const QuantumAlgorithm& alg, const TabFn& f,
                                      const RunOptions& opt = {}) {
  const QState s = run_state(alg, f, opt);
  std::vector<Outcome> raw;
  raw.reserve(s.amplitudes().size());
  for (const auto& [idx, a] : s.amplitudes()) raw.push_back({alg.output(idx), std::norm(a)});
  std::vector<Outcome> grouped = group_outcomes(std::move(raw), opt.group_tol);
  NeumaierSum total;
  for (const Outcome& o : grouped) total.add(o.prob);
  if (std::abs(total.value() - 1.0) > 1e-9)
    throw std::runtime_error("run_exact: output probabilities do not sum to 1");
  return grouped;
}

// One measurement draw from the exact final state.
inline VecX run_sample(const QuantumAlgorithm& alg, const TabFn& f, Rng& rng,
                       const RunOptions& opt = {}) {
  const QState s = run_state(alg, f, opt);
  std::vector<std::pair<std::uint64_t, double>> probs;
  probs.reserve(s.amplitudes().size());
  double total = 0.0;
  for (const auto& [idx, a] : s.amplitudes()) {
    probs.emplace_back(idx, std::norm(a));
    total += std::norm(a);
  }
  std::sort(probs.begin(), probs.end());
  const double target = uniform01(rng) * total;
  double cum = 0.0;
  for (const auto& [idx, p] : probs) {
    cum += p;
    if (target < cum) return alg.output(idx);
  }
  return alg.output(probs.back().first);
}

// Smallest eps such that the output lies within eps of the solution with
// probability >= 3/4, maximized over the test functions.
inline double quantum_error(const QuantumAlgorithm& alg,
                            const std::function<VecX(const TabFn&)>& solution,
                            const std::vector<TabFn>& test_fns, const RunOptions& opt = {}) {
  if (test_fns.empty()) throw std::invalid_argument("quantum_error: no test functions");
  double worst = 0.0;
  for (const TabFn& f : test_fns) {
    const VecX target = solution(f);
    std::vector<std::pair<double, double>> errs;  // (error, prob)
    for (const Outcome& o : run_exact(alg, f, opt))
      errs.emplace_back(lp_norm(sub(target, o.value)), o.prob);
    std::sort(errs.begin(), errs.end());
    double cum = 0.0;
    double e = errs.back().first;
    for (const auto& [err, p] : errs) {
      cum += p;
      if (cum >= 0.75 - 1e-12) {
        e = err;
        break;
      }
    }
    worst = std::max(worst, e);
  }
  return worst;
}

}  // namespace vvmc
