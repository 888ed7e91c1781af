#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vvmc/distribution.hpp"
#include "vvmc/rng.hpp"
#include "vvmc/spaces.hpp"

namespace vvmc {

// ---------------------------------------------------------------------------
// Restricted randomized algorithms: a finite mixture of deterministic
// branches.  Branch omega reads f at fixed nodes t_1..t_n and outputs
// phi_omega(f(t_1),...,f(t_n)).
// ---------------------------------------------------------------------------

struct Branch {
  double weight;
  std::vector<std::int64_t> nodes;
  std::function<VecX(const std::vector<VecX>&)> output;
};

struct RandomizedAlg {
  int arity = 0;  // node count per branch
  std::vector<Branch> branches;

  std::int64_t branch_count() const { return static_cast<std::int64_t>(branches.size()); }
};

inline RandomizedAlg make_randomized_alg(int arity, std::vector<Branch> branches) {
  if (arity < 0) throw std::invalid_argument("RandomizedAlg: negative arity");
  if (branches.empty()) throw std::invalid_argument("RandomizedAlg: no branches");
  NeumaierSum total;
  for (const Branch& b : branches) {
    if (!(b.weight > 0.0)) throw std::invalid_argument("RandomizedAlg: weights must be positive");
    if (static_cast<int>(b.nodes.size()) != arity)
      throw std::invalid_argument("RandomizedAlg: branch node count does not match arity");
    if (!b.output) throw std::invalid_argument("RandomizedAlg: missing output map");
    total.add(b.weight);
  }
  if (std::abs(total.value() - 1.0) > 1e-12)
    throw std::invalid_argument("RandomizedAlg: weights must sum to 1");
  return RandomizedAlg{arity, std::move(branches)};
}

inline VecX run_branch(const RandomizedAlg& alg, const TabFn& f, std::int64_t branch_idx) {
  if (branch_idx < 0 || branch_idx >= alg.branch_count())
    throw std::out_of_range("run_branch: branch index out of range");
  const Branch& b = alg.branches[static_cast<std::size_t>(branch_idx)];
  std::vector<VecX> vals;
  vals.reserve(b.nodes.size());
  for (std::int64_t t : b.nodes) vals.push_back(f.at(t));
  return b.output(vals);
}

inline std::int64_t sample_branch(const RandomizedAlg& alg, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::int64_t i = 0; i < alg.branch_count(); ++i) {
    cum += alg.branches[static_cast<std::size_t>(i)].weight;
    if (u < cum) return i;
  }
  return alg.branch_count() - 1;
}

inline VecX run_sampled(const RandomizedAlg& alg, const TabFn& f, Rng& rng) {
  return run_branch(alg, f, sample_branch(alg, rng));
}

// Exact output distribution over branches, grouped by value.
inline std::vector<Outcome> exact_output_distribution(const RandomizedAlg& alg, const TabFn& f,
                                                      double tol = 1e-12) {
  std::vector<Outcome> raw;
  raw.reserve(alg.branches.size());
  for (std::int64_t i = 0; i < alg.branch_count(); ++i)
    raw.push_back({run_branch(alg, f, i), alg.branches[static_cast<std::size_t>(i)].weight});
  return group_outcomes(std::move(raw), tol);
}

// Distribution of ||target - output|| over branches (err, weight), sorted.
inline std::vector<std::pair<double, double>> error_distribution(const RandomizedAlg& alg,
                                                                 const TabFn& f,
                                                                 const VecX& target) {
  std::vector<std::pair<double, double>> d;
  d.reserve(alg.branches.size());
  for (std::int64_t i = 0; i < alg.branch_count(); ++i)
    d.emplace_back(lp_norm(sub(target, run_branch(alg, f, i))),
                   alg.branches[static_cast<std::size_t>(i)].weight);
  std::sort(d.begin(), d.end());
  return d;
}

// ---------------------------------------------------------------------------
// Expected error sup_f E ||S(f) - A(f)||.  Exact branch enumeration when the
// mixture is small; otherwise a seeded sample mean with a normal-theory 95%
// confidence half-width.
// ---------------------------------------------------------------------------

struct ErrorEstimate {
  double value = 0.0;
  double halfwidth = 0.0;  // 0 for exact evaluation
};

struct RandomizedErrorOptions {
  std::int64_t exact_limit = 1'000'000;
  int trials = 10'000;
  std::uint64_t seed = 0;
  bool force_sampled = false;
};

inline ErrorEstimate randomized_error(const RandomizedAlg& alg,
                                      const std::function<VecX(const TabFn&)>& solution,
                                      const std::vector<TabFn>& test_fns,
                                      const RandomizedErrorOptions& opt = {}) {
  if (test_fns.empty()) throw std::invalid_argument("randomized_error: no test functions");
  const bool exact = !opt.force_sampled && alg.branch_count() <= opt.exact_limit;
  ErrorEstimate best;
  bool first = true;
  std::uint64_t fn_idx = 0;
  for (const TabFn& f : test_fns) {
    const VecX target = solution(f);
    ErrorEstimate e;
    if (exact) {
      double s = 0.0;
      for (std::int64_t i = 0; i < alg.branch_count(); ++i)
        s += alg.branches[static_cast<std::size_t>(i)].weight *
             lp_norm(sub(target, run_branch(alg, f, i)));
      e.value = s;
    } else {
      if (opt.trials < 2) throw std::invalid_argument("randomized_error: trials must be >= 2");
      Rng rng = make_rng(opt.seed, 0xe7707 + fn_idx);
      double s = 0.0, s2 = 0.0;
      for (int t = 0; t < opt.trials; ++t) {
        double err = lp_norm(sub(target, run_sampled(alg, f, rng)));
        s += err;
        s2 += err * err;
      }
      const double mean_err = s / opt.trials;
      const double var = std::max(0.0, s2 / opt.trials - mean_err * mean_err);
      e.value = mean_err;
      e.halfwidth = 1.96 * std::sqrt(var / opt.trials);
    }
    if (first || e.value > best.value) {
      best = e;
      first = false;
    }
    ++fn_idx;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Monte Carlo mean estimation.
// ---------------------------------------------------------------------------

// All N^n node tuples as explicit branches (small cases only); the output of
// every branch is the sample average.
inline RandomizedAlg mc_mean_explicit(std::int64_t N, int n,
                                      std::int64_t branch_limit = 1'000'000) {
  if (N < 1 || n < 1) throw std::invalid_argument("mc_mean_explicit: need N >= 1, n >= 1");
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > branch_limit / N)
      throw std::invalid_argument("mc_mean_explicit: N^n exceeds branch limit");
    total *= N;
  }
  auto average = [](const std::vector<VecX>& vals) {
    VecX acc = zero_vec(vals[0].space);
    for (const VecX& v : vals) axpy(acc, 1.0, v);
    return scaled(acc, 1.0 / static_cast<double>(vals.size()));
  };
  const double w = 1.0 / static_cast<double>(total);
  std::vector<Branch> branches;
  branches.reserve(static_cast<std::size_t>(total));
  for (std::int64_t b = 0; b < total; ++b) {
    std::vector<std::int64_t> nodes(static_cast<std::size_t>(n));
    std::int64_t rest = b;
    for (int l = n - 1; l >= 0; --l) {
      nodes[static_cast<std::size_t>(l)] = rest % N;
      rest /= N;
    }
    branches.push_back({w, std::move(nodes), average});
  }
  return make_randomized_alg(n, std::move(branches));
}

// One draw of the same estimator without materializing the mixture.
inline VecX mc_mean_estimate(const TabFn& f, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("mc_mean_estimate: n must be >= 1");
  const auto N = static_cast<std::uint64_t>(f.domain_size());
  VecX acc = zero_vec(f.space);
  for (int l = 0; l < n; ++l) {
    const auto idx = static_cast<std::size_t>(uniform_index(rng, N));
    axpy(acc, 1.0, f.values[idx]);
  }
  return scaled(acc, 1.0 / static_cast<double>(n));
}

// Monte Carlo for weighted means: every coordinate reuses the same n draws,
// so n function values feed an M-dimensional output.
inline VecX mc_weighted_means(const TabFn& a, const TabFn& f, int n, Rng& rng) {
  if (!f.scalar()) throw std::invalid_argument("mc_weighted_means: f must be scalar-valued");
  if (a.domain_size() != f.domain_size())
    throw std::invalid_argument("mc_weighted_means: domain size mismatch");
  if (n < 1) throw std::invalid_argument("mc_weighted_means: n must be >= 1");
  const auto N = static_cast<std::uint64_t>(a.domain_size());
  VecX acc = zero_vec(a.space);
  for (int l = 0; l < n; ++l) {
    const auto idx = static_cast<std::size_t>(uniform_index(rng, N));
    axpy(acc, f.values[idx].coords[0], a.values[idx]);
  }
  return scaled(acc, 1.0 / static_cast<double>(n));
}

}  // namespace vvmc
