#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vvmc/spaces.hpp"

namespace vvmc {

// Output value with its probability mass.
struct Outcome {
  VecX value;
  double prob;
};

namespace detail {

inline bool lex_less(const VecX& a, const VecX& b) {
  return std::lexicographical_compare(a.coords.begin(), a.coords.end(),
                                      b.coords.begin(), b.coords.end());
}

inline bool close_vec(const VecX& a, const VecX& b, double tol) {
  for (std::size_t i = 0; i < a.coords.size(); ++i)
    if (std::abs(a.coords[i] - b.coords[i]) > tol) return false;
  return true;
}

}  // namespace detail

// Sort by value and merge entries that agree coordinatewise within tol.
// Deterministic: ties and sums are resolved in sorted order.
inline std::vector<Outcome> group_outcomes(std::vector<Outcome> raw, double tol = 1e-12) {
  if (raw.empty()) return raw;
  const LpSpec space = raw[0].value.space;
  for (const Outcome& o : raw)
    if (o.value.space != space)
      throw std::invalid_argument("group_outcomes: mixed output spaces");
  std::sort(raw.begin(), raw.end(), [](const Outcome& a, const Outcome& b) {
    return detail::lex_less(a.value, b.value);
  });
  std::vector<Outcome> out;
  for (Outcome& o : raw) {
    if (!out.empty() && detail::close_vec(out.back().value, o.value, tol)) {
      out.back().prob += o.prob;
    } else {
      out.push_back(std::move(o));
    }
  }
  return out;
}

// Total variation distance between two grouped output distributions; values
// within tol are identified.
inline double total_variation(const std::vector<Outcome>& a, const std::vector<Outcome>& b,
                              double tol = 1e-12) {
  struct Tagged {
    VecX value;
    double pa, pb;
  };
  std::vector<Tagged> all;
  all.reserve(a.size() + b.size());
  for (const Outcome& o : a) all.push_back({o.value, o.prob, 0.0});
  for (const Outcome& o : b) all.push_back({o.value, 0.0, o.prob});
  std::sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) {
    return detail::lex_less(x.value, y.value);
  });
  double tv = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    double pa = all[i].pa, pb = all[i].pb;
    std::size_t j = i + 1;
    while (j < all.size() && detail::close_vec(all[j - 1].value, all[j].value, tol)) {
      pa += all[j].pa;
      pb += all[j].pb;
      ++j;
    }
    tv += std::abs(pa - pb);
    i = j;
  }
  return tv / 2.0;
}

}  // namespace vvmc
