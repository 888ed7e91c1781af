#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vvmc/spaces.hpp"

namespace vvmc {

// ---------------------------------------------------------------------------
// Fixed-point discretization of [-1,1] into 2^bits codes.
//
//   quantize_real:   z -> floor(2^(bits-1) (z+1)),  z = 1 -> 2^bits - 1
//   dequantize_code: y -> 2^(1-bits) y - 1
//
// Together they satisfy the sandwich
//   -1 <= deq(quant(z)) <= z <= deq(quant(z)) + 2^(1-bits) <= 1.
// ---------------------------------------------------------------------------

inline std::uint64_t quantize_real(double z, int bits) {
  if (bits < 1 || bits > 62) throw std::invalid_argument("quantize_real: bits out of range");
  if (!(z >= -1.0 - 1e-12) || !(z <= 1.0 + 1e-12))
    throw std::invalid_argument("quantize_real: input outside [-1,1]");
  z = std::min(1.0, std::max(-1.0, z));
  const std::uint64_t top = (1ull << bits) - 1;
  if (z == 1.0) return top;
  const double scaled = std::ldexp(z + 1.0, bits - 1);
  auto code = static_cast<std::uint64_t>(scaled);  // scaled >= 0, < 2^bits
  return std::min(code, top);
}

inline double dequantize_code(std::uint64_t code, int bits) {
  if (bits < 1 || bits > 62) throw std::invalid_argument("dequantize_code: bits out of range");
  if (code >= (1ull << bits)) throw std::invalid_argument("dequantize_code: code out of range");
  return std::ldexp(static_cast<double>(code), 1 - bits) - 1.0;
}

inline double requantize(double z, int bits) {
  return dequantize_code(quantize_real(z, bits), bits);
}

// ---------------------------------------------------------------------------
// Scalar-to-vector lift: from weights a(j) in the unit ball of X and a scalar
// function |f| <= 1, form the vector-valued functions
//   exact(j)     = f(j) a(j)
//   quantized(j) = requantize(f(j)) a(j)
// whose weighted sums differ by at most 2^(1-bits) in X.
// ---------------------------------------------------------------------------

struct LiftedPair {
  TabFn exact;
  TabFn quantized;
};

inline LiftedPair weight_lift(const TabFn& a, const TabFn& f, int bits) {
  if (!f.scalar()) throw std::invalid_argument("weight_lift: f must be scalar-valued");
  if (a.domain_size() != f.domain_size())
    throw std::invalid_argument("weight_lift: domain size mismatch");
  std::vector<VecX> exact, quant;
  exact.reserve(a.values.size());
  quant.reserve(a.values.size());
  for (std::int64_t j = 0; j < a.domain_size(); ++j) {
    const VecX& aj = a.values[static_cast<std::size_t>(j)];
    if (lp_norm(aj) > 1.0 + 1e-12)
      throw std::invalid_argument("weight_lift: weight outside the unit ball");
    double fj = f.scalar_at(j);
    if (std::abs(fj) > 1.0 + 1e-12)
      throw std::invalid_argument("weight_lift: |f| must be <= 1");
    fj = std::min(1.0, std::max(-1.0, fj));
    exact.push_back(scaled(aj, fj));
    quant.push_back(scaled(aj, requantize(fj, bits)));
  }
  return LiftedPair{make_tabfn(a.space, std::move(exact)),
                    make_tabfn(a.space, std::move(quant))};
}

// ---------------------------------------------------------------------------
// Domain tiling: extend weights over N1 points to N >= N1 points by repeating
// whole blocks (k = floor(N/N1) copies) and zero-padding the remainder.  Then
//   weighted_means(tiled_a, lift(f)) = factor * weighted_means(a, f),
// with factor = k N1 / N.
// ---------------------------------------------------------------------------

struct TiledWeights {
  TabFn weights;  // over {0,...,N-1}
  double factor;
  std::function<TabFn(const TabFn&)> lift;  // f on N1 points -> f~ on N points
};

inline TiledWeights tile_weights(const TabFn& a, std::int64_t N) {
  const std::int64_t N1 = a.domain_size();
  if (N < N1) throw std::invalid_argument("tile_weights: target domain smaller than source");
  const std::int64_t k = N / N1;
  std::vector<VecX> w;
  w.reserve(static_cast<std::size_t>(N));
  for (std::int64_t i = 0; i < N; ++i) {
    if (i < k * N1)
      w.push_back(a.values[static_cast<std::size_t>(i % N1)]);
    else
      w.push_back(zero_vec(a.space));
  }
  auto lift = [N, N1](const TabFn& f) {
    if (f.domain_size() != N1)
      throw std::invalid_argument("tile_weights: lifted function has wrong domain");
    std::vector<VecX> vals;
    vals.reserve(static_cast<std::size_t>(N));
    for (std::int64_t i = 0; i < N; ++i)
      vals.push_back(f.values[static_cast<std::size_t>(i % N1)]);
    return make_tabfn(f.space, std::move(vals));
  };
  return TiledWeights{make_tabfn(a.space, std::move(w)),
                      static_cast<double>(k * N1) / static_cast<double>(N), lift};
}

// ---------------------------------------------------------------------------
// Norm-preserving dimension change.  embed: L_p^M1 -> L_p^M (M >= M1) scales
// by (M/M1)^(1/p) and zero-pads; project: L_p^M -> L_p^M1 scales by
// (M1/M)^(1/p) and truncates.  Both have operator norm 1 and
// project(embed(g)) = g.
// ---------------------------------------------------------------------------

inline double dim_change_scale(double p, std::int64_t from, std::int64_t to) {
  if (std::isinf(p)) return 1.0;
  return std::pow(static_cast<double>(to) / static_cast<double>(from), 1.0 / p);
}

inline VecX dimension_embed(const VecX& g, std::int64_t M) {
  const std::int64_t M1 = g.space.dim;
  if (M < M1) throw std::invalid_argument("dimension_embed: target dimension too small");
  const double c = dim_change_scale(g.space.p, M1, M);
  std::vector<double> out(static_cast<std::size_t>(M), 0.0);
  for (std::int64_t i = 0; i < M1; ++i)
    out[static_cast<std::size_t>(i)] = c * g.coords[static_cast<std::size_t>(i)];
  return make_vec(std::move(out), make_space(g.space.p, M));
}

inline VecX dimension_project(const VecX& g, std::int64_t M1) {
  const std::int64_t M = g.space.dim;
  if (M1 > M) throw std::invalid_argument("dimension_project: target dimension too large");
  const double c = dim_change_scale(g.space.p, M, M1);
  std::vector<double> out(static_cast<std::size_t>(M1));
  for (std::int64_t i = 0; i < M1; ++i)
    out[static_cast<std::size_t>(i)] = c * g.coords[static_cast<std::size_t>(i)];
  return make_vec(std::move(out), make_space(g.space.p, M1));
}

// ---------------------------------------------------------------------------
// Hard-instance weight families.
// ---------------------------------------------------------------------------

// a(j) = N1^(1/p) e_j: unit-ball weights whose weighted sums reproduce the
// whole value vector scaled by N1^(1/p - 1).
inline TabFn unit_vector_weights(double p, std::int64_t N1) {
  LpSpec space = make_space(p, N1);
  const double c = std::isinf(p) ? 1.0 : std::pow(static_cast<double>(N1), 1.0 / p);
  std::vector<VecX> vals;
  vals.reserve(static_cast<std::size_t>(N1));
  for (std::int64_t j = 0; j < N1; ++j) {
    VecX e = zero_vec(space);
    e.coords[static_cast<std::size_t>(j)] = c;
    vals.push_back(std::move(e));
  }
  return make_tabfn(space, std::move(vals));
}

// Sign matrix with entries (-1)^popcount(i & j); symmetric, W^2 = N1 * I.
class WalshMatrix {
 public:
  explicit WalshMatrix(int level) : level_(level) {
    if (level < 1 || level > 10)
      throw std::invalid_argument("WalshMatrix: materialized level must be in [1,10]");
    size_ = std::int64_t{1} << level;
  }
  int level() const { return level_; }
  std::int64_t size() const { return size_; }
  int entry(std::int64_t i, std::int64_t j) const {
    if (i < 0 || j < 0 || i >= size_ || j >= size_)
      throw std::out_of_range("WalshMatrix: index out of range");
    return (std::popcount(static_cast<std::uint64_t>(i & j)) & 1) ? -1 : 1;
  }
  std::vector<double> row(std::int64_t i) const {
    std::vector<double> r(static_cast<std::size_t>(size_));
    for (std::int64_t j = 0; j < size_; ++j)
      r[static_cast<std::size_t>(j)] = entry(i, j);
    return r;
  }
  std::vector<double> multiply(const std::vector<double>& v) const {
    if (static_cast<std::int64_t>(v.size()) != size_)
      throw std::invalid_argument("WalshMatrix: length mismatch");
    std::vector<double> out(v.size(), 0.0);
    for (std::int64_t i = 0; i < size_; ++i) {
      double s = 0.0;
      for (std::int64_t j = 0; j < size_; ++j)
        s += entry(i, j) * v[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = s;
    }
    return out;
  }

 private:
  int level_;
  std::int64_t size_;
};

// In-place fast transform; equals WalshMatrix::multiply at any level without
// materializing the matrix.
inline void walsh_apply(std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("walsh_apply: length must be a power of two");
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double x = v[j];
        double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

// Weights a(j) = j-th column of the sign matrix, unit vectors in every L_p.
inline TabFn walsh_weights(int level, double p = 2.0) {
  if (level < 1 || level > 30) throw std::invalid_argument("walsh_weights: bad level");
  const std::int64_t N1 = std::int64_t{1} << level;
  LpSpec space = make_space(p, N1);
  std::vector<VecX> vals;
  vals.reserve(static_cast<std::size_t>(N1));
  for (std::int64_t j = 0; j < N1; ++j) {
    std::vector<double> col(static_cast<std::size_t>(N1));
    for (std::int64_t i = 0; i < N1; ++i)
      col[static_cast<std::size_t>(i)] =
          (std::popcount(static_cast<std::uint64_t>(i & j)) & 1) ? -1.0 : 1.0;
    vals.push_back(make_vec(std::move(col), space));
  }
  return make_tabfn(space, std::move(vals));
}

// ---------------------------------------------------------------------------
// Known convergence rates, with the constant set to 1.  Values are meaningful
// up to constants (and for lower bounds, up to the iterated-log factor built
// in below).
// ---------------------------------------------------------------------------

inline constexpr const char* kRateNote = "up to constants/log factors";

enum class ErrorSetting { randomized, quantum };
enum class ProblemShape { scalar, vector_valued };
enum class RateBound { upper, lower };

// (log2 log2 n)^(-3/2) (log2 log2 log2 n)^(-1); defined for n > 4.
inline double loglog_factor(std::int64_t n) {
  if (n <= 4) throw std::invalid_argument("loglog_factor: needs n > 4");
  const double l1 = std::log2(static_cast<double>(n));
  const double l2 = std::log2(l1);
  const double l3 = std::log2(l2);
  return std::pow(l2, -1.5) / l3;
}

inline double theoretical_rate(ErrorSetting setting, ProblemShape shape, double p,
                               std::int64_t M, std::int64_t n,
                               RateBound bound = RateBound::upper) {
  if (n < 1) throw std::invalid_argument("theoretical_rate: n must be >= 1");
  const double nd = static_cast<double>(n);
  if (shape == ProblemShape::scalar) {
    return setting == ErrorSetting::quantum ? 1.0 / nd : 1.0 / std::sqrt(nd);
  }
  if (!(p >= 1.0)) throw std::invalid_argument("theoretical_rate: p must be >= 1 (or inf)");
  if (bound == RateBound::upper) {
    if (p < 2.0) return std::pow(nd, 1.0 / p - 1.0);
    if (std::isinf(p))
      return std::sqrt(std::log2(static_cast<double>(M) + 1.0)) / std::sqrt(nd);
    return 1.0 / std::sqrt(nd);
  }
  // Lower bounds carry an iterated-log loss; only defined for n > 4.
  if (p < 2.0) {
    const double l = std::log2(nd);
    return std::pow(nd, 1.0 / p - 1.0) * std::pow(l, 1.0 - 2.0 / p);
  }
  return loglog_factor(n) / std::sqrt(nd);
}

}  // namespace vvmc
