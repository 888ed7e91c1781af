#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvmc/rng.hpp"

namespace vvmc {

// Finite-dimensional sequence space with the normalized p-norm
//   ||x|| = ((1/M) * sum |x_i|^p)^(1/p),   p = inf -> max_i |x_i|.
struct LpSpec {
  double p = 2.0;
  std::int64_t dim = 1;

  bool is_max_norm() const { return std::isinf(p); }
  friend bool operator==(const LpSpec& a, const LpSpec& b) {
    return a.dim == b.dim && (a.p == b.p || (a.is_max_norm() && b.is_max_norm()));
  }
  friend bool operator!=(const LpSpec& a, const LpSpec& b) { return !(a == b); }
};

inline constexpr double kPInf = std::numeric_limits<double>::infinity();

inline LpSpec make_space(double p, std::int64_t dim) {
  if (!(p >= 1.0)) throw std::invalid_argument("LpSpec: p must be >= 1 (or inf)");
  if (dim < 1) throw std::invalid_argument("LpSpec: dim must be >= 1");
  return LpSpec{p, dim};
}

inline LpSpec scalar_space(double p = 2.0) { return make_space(p, 1); }

// Element of an LpSpec with validated shape and finite entries.
struct VecX {
  std::vector<double> coords;
  LpSpec space;

  double scalar() const {
    if (space.dim != 1) throw std::logic_error("VecX: scalar() on non-scalar vector");
    return coords[0];
  }
};

inline VecX make_vec(std::vector<double> coords, const LpSpec& space) {
  if (static_cast<std::int64_t>(coords.size()) != space.dim)
    throw std::invalid_argument("VecX: coordinate count does not match space dimension");
  for (double c : coords)
    if (!std::isfinite(c)) throw std::invalid_argument("VecX: non-finite coordinate");
  return VecX{std::move(coords), space};
}

inline VecX zero_vec(const LpSpec& space) {
  return VecX{std::vector<double>(static_cast<std::size_t>(space.dim), 0.0), space};
}

inline VecX scalar_vec(double x, double p = 2.0) { return make_vec({x}, scalar_space(p)); }

inline void check_same_space(const VecX& a, const VecX& b, const char* what) {
  if (a.space != b.space) throw std::invalid_argument(std::string(what) + ": space mismatch");
}

inline VecX add(const VecX& a, const VecX& b) {
  check_same_space(a, b, "add");
  VecX r = a;
  for (std::size_t i = 0; i < r.coords.size(); ++i) r.coords[i] += b.coords[i];
  return r;
}

inline VecX sub(const VecX& a, const VecX& b) {
  check_same_space(a, b, "sub");
  VecX r = a;
  for (std::size_t i = 0; i < r.coords.size(); ++i) r.coords[i] -= b.coords[i];
  return r;
}

inline VecX scaled(const VecX& a, double c) {
  VecX r = a;
  for (double& x : r.coords) x *= c;
  return r;
}

inline void axpy(VecX& acc, double c, const VecX& x) {
  check_same_space(acc, x, "axpy");
  for (std::size_t i = 0; i < acc.coords.size(); ++i) acc.coords[i] += c * x.coords[i];
}

inline double lp_norm(const VecX& v) {
  const auto& c = v.coords;
  const double M = static_cast<double>(v.space.dim);
  if (v.space.is_max_norm()) {
    double mx = 0.0;
    for (double x : c) mx = std::max(mx, std::abs(x));
    return mx;
  }
  if (v.space.p == 1.0) {
    double s = 0.0;
    for (double x : c) s += std::abs(x);
    return s / M;
  }
  if (v.space.p == 2.0) {
    double s = 0.0;
    for (double x : c) s += x * x;
    return std::sqrt(s / M);
  }
  double s = 0.0;
  for (double x : c) s += std::pow(std::abs(x), v.space.p);
  return std::pow(s / M, 1.0 / v.space.p);
}

// Function on {0,...,N-1} tabulated as a list of values in a common space.
struct TabFn {
  LpSpec space;              // codomain
  std::vector<VecX> values;  // values[i] = f(i)

  std::int64_t domain_size() const { return static_cast<std::int64_t>(values.size()); }
  bool scalar() const { return space.dim == 1; }
  const VecX& at(std::int64_t i) const {
    if (i < 0 || i >= domain_size()) throw std::out_of_range("TabFn: index out of range");
    return values[static_cast<std::size_t>(i)];
  }
  double scalar_at(std::int64_t i) const { return at(i).scalar(); }
};

inline TabFn make_tabfn(const LpSpec& space, std::vector<VecX> values) {
  if (values.empty()) throw std::invalid_argument("TabFn: domain must be nonempty");
  for (const VecX& v : values) {
    if (v.space != space) throw std::invalid_argument("TabFn: value space mismatch");
    if (static_cast<std::int64_t>(v.coords.size()) != space.dim)
      throw std::invalid_argument("TabFn: malformed value");
  }
  return TabFn{space, std::move(values)};
}

inline TabFn scalar_tabfn(const std::vector<double>& vals, double p = 2.0) {
  LpSpec sp = scalar_space(p);
  std::vector<VecX> vv;
  vv.reserve(vals.size());
  for (double x : vals) vv.push_back(make_vec({x}, sp));
  return make_tabfn(sp, std::move(vv));
}

// Plain mean (1/N) sum_i f(i).
inline VecX mean(const TabFn& f) {
  VecX acc = zero_vec(f.space);
  for (const VecX& v : f.values) axpy(acc, 1.0, v);
  return scaled(acc, 1.0 / static_cast<double>(f.domain_size()));
}

// Weighted means (1/N) sum_j f(j) a(j) for scalar f and vector-valued weights a.
inline VecX weighted_means(const TabFn& a, const TabFn& f) {
  if (!f.scalar()) throw std::invalid_argument("weighted_means: f must be scalar-valued");
  if (a.domain_size() != f.domain_size())
    throw std::invalid_argument("weighted_means: domain size mismatch");
  VecX acc = zero_vec(a.space);
  for (std::int64_t j = 0; j < a.domain_size(); ++j)
    axpy(acc, f.values[static_cast<std::size_t>(j)].coords[0], a.values[static_cast<std::size_t>(j)]);
  return scaled(acc, 1.0 / static_cast<double>(a.domain_size()));
}

// Smallest c with  E || sum_i eps_i x_i ||^p <= c^p sum_i ||x_i||^p  over random
// signs eps, estimated on the given vectors: c = (E/denom)^(1/p).  Exact sign
// enumeration for up to 12 vectors, seeded sampling beyond that.
inline double type_constant_estimate(const std::vector<VecX>& xs, double p,
                                     int trials = 4096, std::uint64_t seed = 0) {
  if (xs.empty()) throw std::invalid_argument("type_constant_estimate: empty family");
  if (!(p > 1.0) || !(p <= 2.0))
    throw std::invalid_argument("type_constant_estimate: p must lie in (1,2]");
  const LpSpec space = xs[0].space;
  for (const VecX& x : xs)
    if (x.space != space) throw std::invalid_argument("type_constant_estimate: mixed spaces");

  double denom = 0.0;
  for (const VecX& x : xs) denom += std::pow(lp_norm(x), p);
  if (denom == 0.0) return 0.0;

  const std::size_t k = xs.size();
  double expect = 0.0;
  if (k <= 12) {
    const std::uint64_t total = 1ull << k;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      VecX s = zero_vec(space);
      for (std::size_t i = 0; i < k; ++i)
        axpy(s, (mask >> i) & 1 ? -1.0 : 1.0, xs[i]);
      expect += std::pow(lp_norm(s), p);
    }
    expect /= static_cast<double>(total);
  } else {
    if (trials < 1) throw std::invalid_argument("type_constant_estimate: trials must be >= 1");
    Rng rng = make_rng(seed, 0x7970);
    for (int t = 0; t < trials; ++t) {
      VecX s = zero_vec(space);
      for (std::size_t i = 0; i < k; ++i) axpy(s, coin(rng) ? 1.0 : -1.0, xs[i]);
      expect += std::pow(lp_norm(s), p);
    }
    expect /= static_cast<double>(trials);
  }
  return std::pow(expect / denom, 1.0 / p);
}

// Bit-character rows: row l has entries (-1)^(bit l of j), j = 0..dim-1.
// In the max norm these log2(dim) unit vectors exhibit the sqrt(log dim)
// growth of the type-2 constant.
inline std::vector<VecX> type_witness_rows(std::int64_t dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("type_witness_rows: dim must be a power of two >= 2");
  LpSpec space = make_space(kPInf, dim);
  std::vector<VecX> rows;
  for (std::int64_t l = 1; l < dim; l <<= 1) {
    std::vector<double> r(static_cast<std::size_t>(dim));
    for (std::int64_t j = 0; j < dim; ++j)
      r[static_cast<std::size_t>(j)] = (j & l) ? -1.0 : 1.0;
    rows.push_back(make_vec(std::move(r), space));
  }
  return rows;
}

}  // namespace vvmc
