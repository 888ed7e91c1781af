#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vvmc/qsim.hpp"
#include "vvmc/randomized.hpp"
#include "vvmc/spaces.hpp"

namespace vvmc {

// ---------------------------------------------------------------------------
// A map with a finite, explicitly listed image; the bridge between
// real-valued functions and finite value registers.
// ---------------------------------------------------------------------------

struct FiniteImageMap {
  std::function<VecX(const VecX&)> map;
  std::vector<VecX> image;  // lexicographically sorted, duplicate-free
};

inline FiniteImageMap finite_image_map(std::function<VecX(const VecX&)> map,
                                       std::vector<VecX> image) {
  if (!map) throw std::invalid_argument("FiniteImageMap: missing map");
  if (image.empty()) throw std::invalid_argument("FiniteImageMap: empty image");
  std::sort(image.begin(), image.end(),
            [](const VecX& a, const VecX& b) { return detail::lex_less(a, b); });
  image.erase(std::unique(image.begin(), image.end(),
                          [](const VecX& a, const VecX& b) { return a.coords == b.coords; }),
              image.end());
  return FiniteImageMap{std::move(map), std::move(image)};
}

inline TabFn apply_pointwise(const FiniteImageMap& theta, const TabFn& f) {
  std::vector<VecX> vals;
  vals.reserve(f.values.size());
  for (const VecX& v : f.values) vals.push_back(theta.map(v));
  const LpSpec out_space = vals.front().space;
  return make_tabfn(out_space, std::move(vals));
}

// Net over the unit ball of a space: clamp radially onto the ball, then round
// every coordinate toward zero with step 1/k.  Distortion on the ball is at
// most 1/k, grid points in the ball are fixed, and the image is the full list
// of grid points in the ball.
inline FiniteImageMap ball_net_map(const LpSpec& space, int k) {
  if (k < 1) throw std::invalid_argument("ball_net_map: k must be >= 1");
  double count = 1.0;
  for (std::int64_t i = 0; i < space.dim; ++i) count *= 2.0 * k + 1.0;
  if (count > 2e6) throw std::invalid_argument("ball_net_map: net too large to enumerate");

  auto round_coord = [k](double c) -> double {
    const double t = c * static_cast<double>(k);
    const double r = std::nearbyint(t);
    long long j;
    // Snap when t is an integer up to round-off, so grid points stay fixed.
    if (std::abs(t - r) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      j = static_cast<long long>(r);
    else
      j = static_cast<long long>(std::trunc(t));
    return static_cast<double>(j) / static_cast<double>(k);
  };

  auto map = [space, round_coord](const VecX& x) -> VecX {
    if (x.space != space) throw std::invalid_argument("ball_net_map: space mismatch");
    VecX y = x;
    const double nn = lp_norm(y);
    if (nn > 1.0) y = scaled(y, 1.0 / nn);
    for (double& c : y.coords) c = round_coord(c);
    return y;
  };

  std::vector<VecX> image;
  std::vector<double> coords(static_cast<std::size_t>(space.dim), 0.0);
  std::function<void(std::int64_t)> enumerate = [&](std::int64_t pos) {
    if (pos == space.dim) {
      VecX g = make_vec(coords, space);
      if (lp_norm(g) <= 1.0 + 1e-12) image.push_back(std::move(g));
      return;
    }
    for (long long j = -k; j <= k; ++j) {
      coords[static_cast<std::size_t>(pos)] =
          static_cast<double>(j) / static_cast<double>(k);
      enumerate(pos + 1);
    }
  };
  enumerate(0);
  return finite_image_map(std::move(map), std::move(image));
}

// ---------------------------------------------------------------------------
// Transcription of a restricted randomized algorithm into the query model.
//
// Registers, most significant first:
//   counter (m1 wires), branch (m2 wires), value registers 1..max(n,1)
//   (mv wires each).
// The start unitary loads sqrt(weight) onto |n-1>|omega>|0...>, every query
// deposits the coded value of the current node into value register 1, and the
// in-between permutations decrement the counter and move the fresh code into
// its final slot.  The measured index is decoded branch-wise, so the output
// distribution equals the classical one on the discretized function.
// ---------------------------------------------------------------------------

struct CompileOptions {
  int extra_counter_bits = 0;
  int extra_branch_bits = 0;
  int extra_value_bits = 0;
  int max_qubits = 24;
};

struct CompileWidths {
  int counter_bits;
  int branch_bits;
  int value_bits;
  int total;
};

inline CompileWidths compile_widths(const RandomizedAlg& alg, const FiniteImageMap& theta,
                                    const CompileOptions& opt = {}) {
  auto bits_for = [](std::uint64_t x) {
    return static_cast<int>(std::bit_width(std::max<std::uint64_t>(x, 2) - 1));
  };
  CompileWidths w{};
  w.counter_bits = bits_for(static_cast<std::uint64_t>(alg.arity)) + opt.extra_counter_bits;
  w.branch_bits =
      bits_for(static_cast<std::uint64_t>(alg.branch_count())) + opt.extra_branch_bits;
  w.value_bits =
      bits_for(static_cast<std::uint64_t>(theta.image.size())) + opt.extra_value_bits;
  w.total = w.counter_bits + w.branch_bits + std::max(alg.arity, 1) * w.value_bits;
  return w;
}

inline QuantumAlgorithm compile_to_quantum(const RandomizedAlg& alg,
                                           const FiniteImageMap& theta,
                                           const CompileOptions& opt = {}) {
  const CompileWidths w = compile_widths(alg, theta, opt);
  const int n = alg.arity;
  const std::int64_t K = alg.branch_count();
  const std::int64_t V = static_cast<std::int64_t>(theta.image.size());
  const int m1 = w.counter_bits, m2 = w.branch_bits, mv = w.value_bits;
  const int m_in = m1 + m2;
  const int m = w.total;
  if (m > opt.max_qubits)
    throw resource_error("compiled algorithm needs " + std::to_string(m) + " wires, cap is " +
                         std::to_string(opt.max_qubits));

  auto shared_alg = std::make_shared<const RandomizedAlg>(alg);
  auto image = std::make_shared<const std::vector<VecX>>(theta.image);
  auto theta_map = theta.map;

  auto code_of = [image](const VecX& v) -> std::uint64_t {
    auto it = std::lower_bound(image->begin(), image->end(), v,
                               [](const VecX& a, const VecX& b) { return detail::lex_less(a, b); });
    if (it != image->end() && it->coords == v.coords)
      return static_cast<std::uint64_t>(it - image->begin());
    for (std::size_t i = 0; i < image->size(); ++i)
      if (detail::close_vec((*image)[i], v, 1e-12)) return i;
    throw contract_error("compile: map produced a value outside its declared image");
  };

  // Query: active on (counter, branch) pairs with counter < n; counter value
  // c selects node c+1 of the branch (nodes are queried last to first).
  std::vector<std::uint64_t> active;
  active.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(K));
  for (int i = 0; i < n; ++i)
    for (std::int64_t om = 0; om < K; ++om)
      active.push_back((static_cast<std::uint64_t>(i) << m2) | static_cast<std::uint64_t>(om));

  auto node = [shared_alg, m2](std::uint64_t iw) -> std::int64_t {
    const std::uint64_t i = iw >> m2;
    const std::uint64_t om = iw & ((std::uint64_t{1} << m2) - 1);
    return shared_alg->branches[static_cast<std::size_t>(om)]
        .nodes[static_cast<std::size_t>(i)];
  };
  auto value_code = [theta_map, code_of](const VecX& v) { return code_of(theta_map(v)); };
  QuantumQuery query = make_query(m, m_in, mv, std::move(active), node, value_code);

  // Start unitary: weights onto |n-1>|omega>|0...> (counter 1 when n = 0).
  const std::uint64_t c0 = n >= 1 ? static_cast<std::uint64_t>(n - 1) : 1;
  std::vector<std::pair<std::uint64_t, Amp>> column;
  column.reserve(static_cast<std::size_t>(K));
  for (std::int64_t om = 0; om < K; ++om) {
    std::uint64_t idx = 0;
    idx = reg_set(idx, m, 0, m1, c0);
    idx = reg_set(idx, m, m1, m2, static_cast<std::uint64_t>(om));
    column.emplace_back(
        idx, Amp{std::sqrt(alg.branches[static_cast<std::size_t>(om)].weight), 0.0});
  }
  std::vector<UnitarySpec> unitaries;
  unitaries.push_back(make_prepared_column(0, std::move(column)));

  // Step j: decrement the counter mod 2^m1 and swap value register 1 with
  // value register n+1-j, sending the freshly coded node to its final slot.
  for (int j = 1; j <= n - 1; ++j) {
    const int reg_a = m_in;
    const int reg_b = m_in + (n - j) * mv;
    unitaries.push_back(make_permutation([m, m1, mv, reg_a, reg_b](std::uint64_t idx) {
      const std::uint64_t c = reg_get(idx, m, 0, m1);
      const std::uint64_t dec = (c + (std::uint64_t{1} << m1) - 1) & ((std::uint64_t{1} << m1) - 1);
      idx = reg_set(idx, m, 0, m1, dec);
      const std::uint64_t va = reg_get(idx, m, reg_a, mv);
      const std::uint64_t vb = reg_get(idx, m, reg_b, mv);
      idx = reg_set(idx, m, reg_a, mv, vb);
      return reg_set(idx, m, reg_b, mv, va);
    }));
  }
  if (n >= 1) unitaries.push_back(identity_unitary());

  // Output: decode the branch and the coded node values; indices outside the
  // mixture output zero.
  auto gamma = [image, V](std::uint64_t code) -> const VecX& {
    return (*image)[static_cast<std::size_t>(code < static_cast<std::uint64_t>(V) ? code : 0)];
  };
  std::vector<VecX> probe(static_cast<std::size_t>(n), gamma(0));
  const VecX zero_out = zero_vec(shared_alg->branches[0].output(probe).space);

  auto output = [shared_alg, image, V, K, m, m1, m2, mv, m_in, n,
                 zero_out](std::uint64_t l) -> VecX {
    const std::uint64_t om = reg_get(l, m, m1, m2);
    if (om >= static_cast<std::uint64_t>(K)) return zero_out;
    std::vector<VecX> vals;
    vals.reserve(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      std::uint64_t code = reg_get(l, m, m_in + r * mv, mv);
      if (code >= static_cast<std::uint64_t>(V)) code = 0;
      vals.push_back((*image)[static_cast<std::size_t>(code)]);
    }
    return shared_alg->branches[static_cast<std::size_t>(om)].output(vals);
  };

  return make_quantum_alg(std::move(query), std::move(unitaries), 0, std::move(output));
}

}  // namespace vvmc
