#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vvmc/qcompile.hpp"
#include "vvmc/randomized.hpp"
#include "vvmc/rng.hpp"
#include "vvmc/spaces.hpp"

namespace vvmc {

inline TabFn random_scalar_tabfn(std::int64_t N, Rng& rng, double lo = -1.0, double hi = 1.0,
                                 double p = 2.0) {
  std::vector<double> vals(static_cast<std::size_t>(N));
  for (double& v : vals) v = uniform(rng, lo, hi);
  return scalar_tabfn(vals, p);
}

// Coordinates uniform in [-1,1]; every value lies in the unit ball of the
// space since the normalized norm is at most the sup of the coordinates.
inline TabFn random_vector_tabfn(std::int64_t N, const LpSpec& space, Rng& rng) {
  std::vector<VecX> vals;
  vals.reserve(static_cast<std::size_t>(N));
  for (std::int64_t i = 0; i < N; ++i) {
    std::vector<double> c(static_cast<std::size_t>(space.dim));
    for (double& x : c) x = uniform(rng, -1.0, 1.0);
    vals.push_back(make_vec(std::move(c), space));
  }
  return make_tabfn(space, std::move(vals));
}

inline TabFn random_boolean_tabfn(std::int64_t N, Rng& rng) {
  std::vector<double> vals(static_cast<std::size_t>(N));
  for (double& v : vals) v = coin(rng) ? 1.0 : 0.0;
  return scalar_tabfn(vals);
}

inline TabFn constant_scalar_tabfn(std::int64_t N, double value, double p = 2.0) {
  return scalar_tabfn(std::vector<double>(static_cast<std::size_t>(N), value), p);
}

// Boolean function with exactly `ones` ones, in the low positions.
inline TabFn boolean_block_tabfn(std::int64_t N, std::int64_t ones) {
  if (ones < 0 || ones > N) throw std::invalid_argument("boolean_block_tabfn: bad count");
  std::vector<double> vals(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t i = 0; i < ones; ++i) vals[static_cast<std::size_t>(i)] = 1.0;
  return scalar_tabfn(vals);
}

// Random restricted mixture with scalar affine branch outputs
//   phi_omega(v_1..v_n) = c_0 + sum_l c_l v_l.
inline RandomizedAlg random_restricted_alg(std::int64_t N, int n, int branch_count, Rng& rng) {
  if (branch_count < 1) throw std::invalid_argument("random_restricted_alg: no branches");
  std::vector<double> raw(static_cast<std::size_t>(branch_count));
  double total = 0.0;
  for (double& w : raw) {
    w = uniform(rng, 0.25, 1.0);
    total += w;
  }
  std::vector<Branch> branches;
  branches.reserve(raw.size());
  for (int b = 0; b < branch_count; ++b) {
    std::vector<std::int64_t> nodes(static_cast<std::size_t>(n));
    for (auto& t : nodes) t = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(N)));
    auto coeffs = std::make_shared<const std::vector<double>>([&] {
      std::vector<double> c(static_cast<std::size_t>(n) + 1);
      for (double& x : c) x = uniform(rng, -1.0, 1.0);
      return c;
    }());
    auto out = [coeffs](const std::vector<VecX>& vals) {
      double s = (*coeffs)[0];
      for (std::size_t l = 0; l < vals.size(); ++l) s += (*coeffs)[l + 1] * vals[l].scalar();
      return scalar_vec(s);
    };
    branches.push_back({raw[static_cast<std::size_t>(b)] / total, std::move(nodes), out});
  }
  return make_randomized_alg(n, std::move(branches));
}

// Scalar discretizer with `levels` evenly spaced output values, the midpoints
// of equal bins of [-1,1]; input is clamped to [-1,1] and mapped to the
// midpoint of its bin.
inline FiniteImageMap scalar_bin_map(int levels) {
  if (levels < 1) throw std::invalid_argument("scalar_bin_map: need >= 1 level");
  const double V = levels;
  auto level_value = [V](int j) { return -1.0 + (2.0 * j + 1.0) / V; };
  auto map = [V, level_value](const VecX& v) {
    double z = std::min(1.0, std::max(-1.0, v.scalar()));
    int bin = static_cast<int>(std::floor((z + 1.0) * V / 2.0));
    bin = std::min(static_cast<int>(V) - 1, std::max(0, bin));
    return scalar_vec(level_value(bin));
  };
  std::vector<VecX> image;
  for (int j = 0; j < levels; ++j) image.push_back(scalar_vec(level_value(j)));
  return finite_image_map(std::move(map), std::move(image));
}

}  // namespace vvmc
