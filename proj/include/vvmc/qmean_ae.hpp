#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vvmc/qsim.hpp"
#include "vvmc/reductions.hpp"

namespace vvmc {

// Accuracy of t-wire amplitude estimation: with probability >= 8/pi^2 the
// estimate a^ of a satisfies |a^ - a| <= 2 pi sqrt(a(1-a))/2^t + pi^2/4^t.
inline double counting_error_bound(double a, int t) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("counting_error_bound: a in [0,1]");
  if (t < 1) throw std::invalid_argument("counting_error_bound: t must be >= 1");
  const double M = std::ldexp(1.0, t);
  return 2.0 * std::numbers::pi * std::sqrt(a * (1.0 - a)) / M +
         std::numbers::pi * std::numbers::pi / (M * M);
}

namespace detail {

inline int log2_exact(std::int64_t N, const char* what) {
  if (N < 2 || (N & (N - 1)) != 0)
    throw std::invalid_argument(std::string(what) + ": domain size must be a power of two >= 2");
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(N)) - 1);
}

// Phase estimation scaffolding shared by the counting and mean builders.
// Walks the schedule of controlled reflection blocks: control wire m-1-j is
// in charge of 2^j repetitions, followed by the inverse Fourier transform.
struct AeSchedule {
  std::vector<std::vector<UnitarySpec>> slots;  // slots[k] = unitary between queries k and k+1

  explicit AeSchedule(std::vector<UnitarySpec> prep) { slots.push_back(std::move(prep)); }
  void add(UnitarySpec u) { slots.back().push_back(std::move(u)); }
  void add_all(std::vector<UnitarySpec> us) {
    for (auto& u : us) slots.back().push_back(std::move(u));
  }
  void next_slot() { slots.emplace_back(); }
  std::vector<UnitarySpec> finish(int m, int t) {
    slots.back().push_back(make_inverse_qft(m - t, t));
    std::vector<UnitarySpec> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(make_composite(std::move(s)));
    return out;
  }
};

// Reflection about the uniform state over `wires`, made conditional on the
// control and carrying the conditional global sign of the walk operator.
inline std::vector<UnitarySpec> controlled_diffusion(int control, const std::vector<int>& wires) {
  std::vector<UnitarySpec> us;
  for (int w : wires) us.push_back(gates::hadamard(w));
  for (int w : wires) us.push_back(gates::pauli_x(w));
  std::vector<int> all{control};
  all.insert(all.end(), wires.begin(), wires.end());
  us.push_back(gates::mcz(all));
  for (int w : wires) us.push_back(gates::pauli_x(w));
  for (int w : wires) us.push_back(gates::hadamard(w));
  us.push_back(gates::pauli_z(control));
  return us;
}

inline VecX phase_output(std::uint64_t l, int t) {
  const std::uint64_t y = l & ((std::uint64_t{1} << t) - 1);
  const double ang = std::numbers::pi * static_cast<double>(y) / std::ldexp(1.0, t);
  const double s = std::sin(ang);
  return scalar_vec(s * s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Amplitude-estimation counting for a Boolean function on {0..N-1}, N = 2^r.
// Wires: index (r), value (1), phase (t).  Each reflection block conjugates
// the query by a control-to-value ladder so the single query operator serves
// both control branches, and uses 2^t - 1 queries overall.  The measured
// phase y yields the estimate sin^2(pi y / 2^t) of the fraction of ones.
// ---------------------------------------------------------------------------

inline QuantumAlgorithm counting_algorithm(std::int64_t N, int t, int max_qubits = 24) {
  const int r = detail::log2_exact(N, "counting_algorithm");
  if (t < 1 || t > 24) throw std::invalid_argument("counting_algorithm: t out of range");
  const int m = r + 1 + t;
  if (m > max_qubits)
    throw resource_error("counting needs " + std::to_string(m) + " wires, cap is " +
                         std::to_string(max_qubits));
  const int val = r;

  std::vector<std::uint64_t> active(static_cast<std::size_t>(N));
  for (std::int64_t i = 0; i < N; ++i) active[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
  auto value_code = [](const VecX& v) -> std::uint64_t {
    const double x = v.scalar();
    if (x == 0.0) return 0;
    if (x == 1.0) return 1;
    throw std::domain_error("counting_algorithm: function values must be exactly 0 or 1");
  };
  QuantumQuery query = make_query(m, r, 1, std::move(active),
                                  [](std::uint64_t i) { return static_cast<std::int64_t>(i); },
                                  value_code);

  std::vector<int> idx_wires(static_cast<std::size_t>(r));
  for (int wdx = 0; wdx < r; ++wdx) idx_wires[static_cast<std::size_t>(wdx)] = wdx;

  std::vector<UnitarySpec> prep;
  for (int wdx : idx_wires) prep.push_back(gates::hadamard(wdx));
  for (int wdx = m - t; wdx < m; ++wdx) prep.push_back(gates::hadamard(wdx));
  detail::AeSchedule sched(std::move(prep));

  for (int j = t - 1; j >= 0; --j) {
    const int c = m - 1 - j;
    const std::int64_t reps = std::int64_t{1} << j;
    for (std::int64_t rep = 0; rep < reps; ++rep) {
      // Value wire enters the query as |-> on the control branch (phase
      // kickback) and |+> off it (invariant), so one uncontrolled query
      // implements the controlled sign flip.
      sched.add(gates::cnot(c, val));
      sched.add(gates::hadamard(val));
      sched.next_slot();  // query runs here
      sched.add(gates::hadamard(val));
      sched.add(gates::cnot(c, val));
      sched.add_all(detail::controlled_diffusion(c, idx_wires));
    }
  }

  auto output = [t](std::uint64_t l) { return detail::phase_output(l, t); };
  return make_quantum_alg(std::move(query), sched.finish(m, t), 0, std::move(output));
}

// ---------------------------------------------------------------------------
// Amplitude-estimation mean for a function with values in [0,1].  The value
// register holds the fixed-point code of f(i); a comparator register of
// value_bits - 1 wires turns the code into a marked fraction equal to the
// requantized value, so the estimated amplitude is the requantized mean
//   (1/N) sum_i requantize(f(i)).
// Each reflection block costs two queries (compute and uncompute via value
// negation), 2 (2^t - 1) in total.
// ---------------------------------------------------------------------------

inline QuantumAlgorithm mean_algorithm(std::int64_t N, int t, int value_bits,
                                       int max_qubits = 24) {
  const int r = detail::log2_exact(N, "mean_algorithm");
  if (t < 1 || t > 24) throw std::invalid_argument("mean_algorithm: t out of range");
  if (value_bits < 2 || value_bits > 20)
    throw std::invalid_argument("mean_algorithm: value_bits out of range");
  const int mv = value_bits;
  const int nu = mv - 1;  // comparator wires
  const int m = r + mv + nu + 1 + t;
  if (m > max_qubits)
    throw resource_error("mean estimation needs " + std::to_string(m) + " wires, cap is " +
                         std::to_string(max_qubits));
  const int val_first = r;
  const int comp_first = r + mv;
  const int anc = r + mv + nu;

  std::vector<std::uint64_t> active(static_cast<std::size_t>(N));
  for (std::int64_t i = 0; i < N; ++i) active[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
  auto value_code = [mv](const VecX& v) -> std::uint64_t {
    double x = v.scalar();
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
      throw std::domain_error("mean_algorithm: function values must lie in [0,1]");
    x = std::min(1.0, std::max(0.0, x));
    return quantize_real(x, mv);
  };
  QuantumQuery query = make_query(m, r, mv, std::move(active),
                                  [](std::uint64_t i) { return static_cast<std::int64_t>(i); },
                                  value_code);

  // Comparator sign flip: toggle the ancilla exactly when
  // comparator < code - 2^(mv-1); the marked fraction per index equals the
  // requantized value.
  UnitarySpec cmp = make_permutation([m, mv, nu, val_first, comp_first, anc](std::uint64_t idx) {
    const std::uint64_t code = reg_get(idx, m, val_first, mv);
    const std::uint64_t j = reg_get(idx, m, comp_first, nu);
    if (j + (std::uint64_t{1} << (mv - 1)) < code) idx ^= wire_mask(m, anc);
    return idx;
  });
  // Value-register negation; conjugating the query with it yields the inverse
  // query, which uncomputes the code.
  UnitarySpec neg = make_permutation([m, mv, val_first](std::uint64_t idx) {
    const std::uint64_t code = reg_get(idx, m, val_first, mv);
    const std::uint64_t mask = (std::uint64_t{1} << mv) - 1;
    return reg_set(idx, m, val_first, mv, (mask + 1 - code) & mask);
  });

  std::vector<int> search_wires;
  for (int wdx = 0; wdx < r; ++wdx) search_wires.push_back(wdx);
  for (int wdx = comp_first; wdx < comp_first + nu; ++wdx) search_wires.push_back(wdx);

  std::vector<UnitarySpec> prep;
  for (int wdx : search_wires) prep.push_back(gates::hadamard(wdx));
  for (int wdx = m - t; wdx < m; ++wdx) prep.push_back(gates::hadamard(wdx));
  detail::AeSchedule sched(std::move(prep));

  for (int j = t - 1; j >= 0; --j) {
    const int c = m - 1 - j;
    const std::int64_t reps = std::int64_t{1} << j;
    for (std::int64_t rep = 0; rep < reps; ++rep) {
      sched.next_slot();  // first query: code the value
      sched.add(gates::cnot(c, anc));
      sched.add(gates::hadamard(anc));
      sched.add(cmp);
      sched.add(gates::hadamard(anc));
      sched.add(gates::cnot(c, anc));
      sched.add(neg);
      sched.next_slot();  // second query: uncompute the code
      sched.add(neg);
      sched.add_all(detail::controlled_diffusion(c, search_wires));
    }
  }

  auto output = [t](std::uint64_t l) { return detail::phase_output(l, t); };
  return make_quantum_alg(std::move(query), sched.finish(m, t), 0, std::move(output));
}

// Exact target of mean_algorithm: the mean of the requantized values.
inline double requantized_mean(const TabFn& f, int value_bits) {
  if (!f.scalar()) throw std::invalid_argument("requantized_mean: f must be scalar-valued");
  double s = 0.0;
  for (std::int64_t i = 0; i < f.domain_size(); ++i) {
    double x = f.scalar_at(i);
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
      throw std::domain_error("requantized_mean: function values must lie in [0,1]");
    x = std::min(1.0, std::max(0.0, x));
    s += requantize(x, value_bits);
  }
  return s / static_cast<double>(f.domain_size());
}

}  // namespace vvmc
