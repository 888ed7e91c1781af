#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "vvmc/generators.hpp"
#include "vvmc/qcompile.hpp"
#include "vvmc/qmean_ae.hpp"
#include "vvmc/qsim.hpp"
#include "vvmc/randomized.hpp"
#include "vvmc/reductions.hpp"
#include "vvmc/spaces.hpp"
#include "vvmc/tabfn_io.hpp"

namespace vvmc {

// ---------------------------------------------------------------------------
// Sweep configuration.
// ---------------------------------------------------------------------------

struct SweepConfig {
  std::string problem = "mean";        // "mean" | "weighted-means"
  std::string family = "mc";           // "mc" | "mc-reuse" | "ae" | "compiled"
  double p = 2.0;
  std::int64_t M = 1;
  std::int64_t N = 1024;
  std::vector<std::int64_t> n_grid;    // for "ae": phase-register widths t
  std::string test_family = "random";  // "random" | "unitvec" | "walsh" | "file"
  std::string test_file;
  int instances = 1;
  int trials = 100;
  std::uint64_t seed = 0;
  int theta_k = 8;      // net resolution for "compiled"
  int value_bits = 6;   // fixed-point width where needed
  int cap_qubits = 24;
};

inline void validate_config(const SweepConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (c.problem != "mean" && c.problem != "weighted-means") fail("unknown problem " + c.problem);
  if (c.family != "mc" && c.family != "mc-reuse" && c.family != "ae" && c.family != "compiled")
    fail("unknown family " + c.family);
  if (c.test_family != "random" && c.test_family != "unitvec" && c.test_family != "walsh" &&
      c.test_family != "file")
    fail("unknown test family " + c.test_family);
  if (c.family == "mc" && c.problem != "mean") fail("family mc solves problem mean");
  if (c.family == "mc-reuse" && c.problem != "weighted-means")
    fail("family mc-reuse solves problem weighted-means");
  if ((c.family == "ae" || c.family == "compiled") &&
      (c.problem != "mean" || c.M != 1))
    fail("family " + c.family + " solves the scalar mean problem");
  if ((c.test_family == "unitvec" || c.test_family == "walsh") && c.problem != "weighted-means")
    fail("test family " + c.test_family + " applies to weighted-means");
  if (c.test_family == "file" && c.test_file.empty()) fail("test family file needs test_file");
  if (c.test_family == "walsh" && (c.N < 2 || (c.N & (c.N - 1)) != 0))
    fail("walsh test family needs N a power of two");
  if (c.family == "ae" && (c.N < 2 || (c.N & (c.N - 1)) != 0))
    fail("family ae needs N a power of two");
  if (!(c.p >= 1.0)) fail("p must be >= 1 (or inf)");
  if (c.M < 1) fail("M must be >= 1");
  if (c.N < 1) fail("N must be >= 1");
  if (c.n_grid.empty()) fail("n_grid must be nonempty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 1) fail("n_grid entries must be >= 1");
    if (i && c.n_grid[i] <= c.n_grid[i - 1]) fail("n_grid must be strictly increasing");
  }
  if (c.family == "ae")
    for (std::int64_t t : c.n_grid)
      if (t > 24) fail("ae n_grid entries are phase widths and must be <= 24");
  if (c.instances < 1) fail("instances must be >= 1");
  if (c.trials < 2) fail("trials must be >= 2");
  if (c.theta_k < 1) fail("theta_k must be >= 1");
  if (c.value_bits < 2 || c.value_bits > 16) fail("value_bits must be in [2,16]");
  if (c.cap_qubits < 1 || c.cap_qubits > 62) fail("cap_qubits must be in [1,62]");
}

inline ordered_json sweep_config_to_json(const SweepConfig& c) {
  ordered_json j;
  j["problem"] = c.problem;
  j["family"] = c.family;
  j["p"] = p_to_json(c.p);
  j["M"] = c.M;
  j["N"] = c.N;
  j["n_grid"] = c.n_grid;
  j["test_family"] = c.test_family;
  if (!c.test_file.empty()) j["test_file"] = c.test_file;
  j["instances"] = c.instances;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["theta_k"] = c.theta_k;
  j["value_bits"] = c.value_bits;
  j["cap_qubits"] = c.cap_qubits;
  return j;
}

inline SweepConfig sweep_config_from_json(const ordered_json& j) {
  SweepConfig c;
  for (const auto& [key, val] : j.items()) {
    if (key == "problem") c.problem = val.get<std::string>();
    else if (key == "family") c.family = val.get<std::string>();
    else if (key == "p") c.p = p_from_json(val);
    else if (key == "M") c.M = val.get<std::int64_t>();
    else if (key == "N") c.N = val.get<std::int64_t>();
    else if (key == "n_grid") c.n_grid = val.get<std::vector<std::int64_t>>();
    else if (key == "test_family") c.test_family = val.get<std::string>();
    else if (key == "test_file") c.test_file = val.get<std::string>();
    else if (key == "instances") c.instances = val.get<int>();
    else if (key == "trials") c.trials = val.get<int>();
    else if (key == "seed") c.seed = val.get<std::uint64_t>();
    else if (key == "theta_k") c.theta_k = val.get<int>();
    else if (key == "value_bits") c.value_bits = val.get<int>();
    else if (key == "cap_qubits") c.cap_qubits = val.get<int>();
    else throw std::invalid_argument("config: unknown key " + key);
  }
  validate_config(c);
  return c;
}

// ---------------------------------------------------------------------------
// Rate report.
// ---------------------------------------------------------------------------

struct RatePoint {
  std::int64_t n = 0;  // information cost (queries or samples)
  double error = 0.0;
  double halfwidth = 0.0;
  double theory = 0.0;
};

struct RateReport {
  SweepConfig config;
  std::vector<RatePoint> points;
  bool slope_valid = false;
  double slope = 0.0;
  double theory_slope = 0.0;
  double slope_window = 0.0;
  bool slope_pass = false;
  std::string note = kRateNote;
};

inline bool fit_loglog(const std::vector<RatePoint>& pts, double& slope) {
  if (pts.size() < 4) return false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const RatePoint& q : pts) {
    if (!(q.error > 0.0)) return false;
    const double x = std::log2(static_cast<double>(q.n));
    const double y = std::log2(q.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(pts.size());
  const double den = k * sxx - sx * sx;
  if (den == 0.0) return false;
  slope = (k * sxy - sx * sy) / den;
  return true;
}

namespace detail {

struct MeanAcc {
  double s = 0.0, s2 = 0.0;
  int count = 0;
  void add(double x) {
    s += x;
    s2 += x * x;
    ++count;
  }
  double mean() const { return s / count; }
  double halfwidth() const {
    const double m = mean();
    const double var = std::max(0.0, s2 / count - m * m);
    return 1.96 * std::sqrt(var / count);
  }
};

// One (weights, function) pair to test against.
struct TestInstance {
  TabFn weights;  // unused for the scalar mean problem
  TabFn fn;
  bool has_weights = false;
};

inline std::vector<TestInstance> build_instances(const SweepConfig& c) {
  std::vector<TestInstance> out;
  const LpSpec vspace = make_space(c.p, c.M);
  if (c.test_family == "file") {
    TabFn loaded = load_tabfn(c.test_file, c.p);
    if (c.problem == "mean") {
      out.push_back({TabFn{}, loaded, false});
    } else {
      out.push_back({loaded, constant_scalar_tabfn(loaded.domain_size(), 1.0), true});
    }
    return out;
  }
  if (c.test_family == "unitvec") {
    TabFn a = unit_vector_weights(c.p, c.N);
    out.push_back({a, constant_scalar_tabfn(c.N, 1.0), true});
    return out;
  }
  if (c.test_family == "walsh") {
    const int level = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(c.N)) - 1);
    TabFn a = walsh_weights(level, c.p);
    out.push_back({a, constant_scalar_tabfn(c.N, 1.0), true});
    return out;
  }
  for (int i = 0; i < c.instances; ++i) {
    Rng rng = make_rng(c.seed, 0xf0000 + static_cast<std::uint64_t>(i));
    if (c.problem == "mean") {
      TabFn f = c.family == "ae" ? random_boolean_tabfn(c.N, rng)
                : (c.M == 1 ? random_scalar_tabfn(c.N, rng, -1.0, 1.0, c.p)
                            : random_vector_tabfn(c.N, vspace, rng));
      out.push_back({TabFn{}, std::move(f), false});
    } else {
      TabFn a = random_vector_tabfn(c.N, vspace, rng);
      TabFn f = random_scalar_tabfn(c.N, rng);
      out.push_back({std::move(a), std::move(f), true});
    }
  }
  return out;
}

}  // namespace detail

inline double family_theory_slope(const SweepConfig& c) {
  if (c.family == "ae") return -1.0;
  if (c.problem == "mean" && c.M == 1) return -0.5;
  if (!std::isinf(c.p) && c.p < 2.0) return 1.0 / c.p - 1.0;
  return -0.5;
}

inline double family_slope_window(const SweepConfig& c) {
  return (c.family == "mc" || c.family == "mc-reuse") ? 0.1 : 0.15;
}

inline RateReport rate_sweep(const SweepConfig& cfg) {
  validate_config(cfg);
  RateReport rep;
  rep.config = cfg;
  const auto instances = detail::build_instances(cfg);
  const ErrorSetting setting =
      (cfg.family == "ae" || cfg.family == "compiled") ? ErrorSetting::quantum
                                                       : ErrorSetting::randomized;
  const ProblemShape shape =
      (cfg.problem == "mean" && cfg.M == 1) ? ProblemShape::scalar : ProblemShape::vector_valued;

  for (std::size_t pi = 0; pi < cfg.n_grid.size(); ++pi) {
    const std::int64_t gval = cfg.n_grid[pi];
    RatePoint pt;
    if (cfg.family == "mc" || cfg.family == "mc-reuse") {
      const int n = static_cast<int>(gval);
      pt.n = gval;
      double worst = -1.0, worst_hw = 0.0;
      for (std::size_t ii = 0; ii < instances.size(); ++ii) {
        const auto& inst = instances[ii];
        const VecX target = inst.has_weights ? weighted_means(inst.weights, inst.fn)
                                             : mean(inst.fn);
        Rng rng = make_rng(cfg.seed, 0xa00000 + pi * 4096 + ii);
        detail::MeanAcc acc;
        for (int tr = 0; tr < cfg.trials; ++tr) {
          const VecX est = inst.has_weights
                               ? mc_weighted_means(inst.weights, inst.fn, n, rng)
                               : mc_mean_estimate(inst.fn, n, rng);
          acc.add(lp_norm(sub(target, est)));
        }
        if (acc.mean() > worst) {
          worst = acc.mean();
          worst_hw = acc.halfwidth();
        }
      }
      pt.error = worst;
      pt.halfwidth = worst_hw;
    } else if (cfg.family == "ae") {
      const int t = static_cast<int>(gval);
      const QuantumAlgorithm alg = counting_algorithm(cfg.N, t, cfg.cap_qubits);
      pt.n = (std::int64_t{1} << t) - 1;  // query count
      std::vector<TabFn> fns;
      for (const auto& inst : instances) fns.push_back(inst.fn);
      pt.error = quantum_error(alg, [](const TabFn& f) { return mean(f); }, fns,
                               RunOptions{cfg.cap_qubits, 1e-12});
      pt.halfwidth = 0.0;
    } else {  // compiled
      const int n = static_cast<int>(gval);
      const RandomizedAlg mc = mc_mean_explicit(cfg.N, n);
      const FiniteImageMap theta = ball_net_map(scalar_space(cfg.p), cfg.theta_k);
      CompileOptions copt;
      copt.max_qubits = cfg.cap_qubits;
      const QuantumAlgorithm alg = compile_to_quantum(mc, theta, copt);
      pt.n = alg.query_count();
      std::vector<TabFn> fns;
      for (const auto& inst : instances) fns.push_back(inst.fn);
      pt.error = quantum_error(alg, [](const TabFn& f) { return mean(f); }, fns,
                               RunOptions{cfg.cap_qubits, 1e-12});
      pt.halfwidth = 0.0;
    }
    pt.theory = theoretical_rate(setting, shape, cfg.p, cfg.M, pt.n);
    rep.points.push_back(pt);
  }

  rep.theory_slope = family_theory_slope(cfg);
  rep.slope_window = family_slope_window(cfg);
  rep.slope_valid = fit_loglog(rep.points, rep.slope);
  rep.slope_pass = rep.slope_valid && std::abs(rep.slope - rep.theory_slope) <= rep.slope_window;
  return rep;
}

// ---------------------------------------------------------------------------
// Report output.  CSV columns are fixed; JSON carries the config echo and the
// slope summary.  Doubles are printed with %.17g so reruns are byte-stable.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline void write_rate_csv(const RateReport& rep, std::ostream& os) {
  os << "n,error,halfwidth,theory\n";
  for (const RatePoint& q : rep.points)
    os << q.n << ',' << detail::fmt17(q.error) << ',' << detail::fmt17(q.halfwidth) << ','
       << detail::fmt17(q.theory) << '\n';
}

inline ordered_json rate_report_to_json(const RateReport& rep) {
  ordered_json j;
  j["config"] = sweep_config_to_json(rep.config);
  ordered_json pts = ordered_json::array();
  for (const RatePoint& q : rep.points) {
    ordered_json pj;
    pj["n"] = q.n;
    pj["error"] = q.error;
    pj["halfwidth"] = q.halfwidth;
    pj["theory"] = q.theory;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  j["slope_valid"] = rep.slope_valid;
  if (rep.slope_valid) j["slope"] = rep.slope;
  j["theory_slope"] = rep.theory_slope;
  j["slope_window"] = rep.slope_window;
  j["slope_pass"] = rep.slope_pass;
  j["note"] = rep.note;
  return j;
}

inline void write_rate_report(const RateReport& rep, std::ostream& os,
                              const std::string& format) {
  if (format == "csv") {
    write_rate_csv(rep, os);
  } else if (format == "json") {
    os << rate_report_to_json(rep).dump(2) << '\n';
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
}

// ---------------------------------------------------------------------------
// Transcription case matrix: every (arity, mixture size, image size, domain
// size) combination, many random mixtures and functions, comparing the
// compiled output distribution with the classical one on the discretized
// function in total variation.
// ---------------------------------------------------------------------------

struct MatrixResult {
  int cases = 0;
  int comparisons = 0;
  double max_tv = 0.0;
  bool query_counts_ok = true;
};

inline MatrixResult compile_case_matrix(std::uint64_t seed, int fns_per_case = 20) {
  MatrixResult res;
  std::uint64_t case_idx = 0;
  for (int n : {0, 1, 2, 3}) {
    for (int K : {1, 2, 4}) {
      for (int V : {2, 4}) {
        for (std::int64_t N : {2, 4, 8}) {
          Rng rng = make_rng(seed, 0xcc00 + case_idx++);
          const RandomizedAlg alg = random_restricted_alg(N, n, K, rng);
          const FiniteImageMap theta = scalar_bin_map(V);
          const QuantumAlgorithm q = compile_to_quantum(alg, theta);
          if (q.query_count() != n) res.query_counts_ok = false;
          const TabFn f_probe = random_scalar_tabfn(N, rng);
          for (int fi = 0; fi < fns_per_case; ++fi) {
            const TabFn f = fi ? random_scalar_tabfn(N, rng) : f_probe;
            const auto classical = exact_output_distribution(alg, apply_pointwise(theta, f));
            const auto quantum = run_exact(q, f);
            res.max_tv = std::max(res.max_tv, total_variation(classical, quantum));
            ++res.comparisons;
          }
          ++res.cases;
        }
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Fidelity suite: exact identities and distribution equalities, reported one
// line per check.  A fault can be injected to confirm the harness notices.
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  double observed = 0.0;   // maximum violation seen
  double tolerance = 0.0;  // pass iff observed <= tolerance
  bool pass = false;
};

enum class FaultInject { none, walsh_flip };

inline std::vector<CheckResult> fidelity_suite(std::uint64_t seed = 0,
                                               FaultInject fault = FaultInject::none) {
  std::vector<CheckResult> out;
  auto record = [&out](const std::string& name, double observed, double tol) {
    out.push_back({name, observed, tol, observed <= tol});
  };
  const std::vector<double> p_choices{1.0, 1.5, 2.0, 3.0, kPInf};

  {  // quantizer sandwich on random points and endpoints
    Rng rng = make_rng(seed, 1);
    double viol = 0.0;
    for (int it = 0; it < 10000; ++it) {
      const int bits = uniform_int(rng, 1, 12);
      double z;
      const int kind = uniform_int(rng, 0, 9);
      if (kind == 0) z = -1.0;
      else if (kind == 1) z = 1.0;
      else z = uniform(rng, -1.0, 1.0);
      const double g = requantize(z, bits);
      const double step = std::ldexp(1.0, 1 - bits);
      viol = std::max({viol, -1.0 - g, g - z, z - (g + step), (g + step) - 1.0});
    }
    record("quantizer-sandwich", viol, 1e-12);
  }

  {  // lifted weighted means: bias bound and route agreement
    Rng rng = make_rng(seed, 2);
    double viol = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = p_choices[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      const LpSpec space = make_space(p, uniform_int(rng, 1, 6));
      const std::int64_t N = uniform_int(rng, 1, 12);
      const int bits = uniform_int(rng, 2, 10);
      const TabFn a = random_vector_tabfn(N, space, rng);
      const TabFn f = random_scalar_tabfn(N, rng);
      const LiftedPair lift = weight_lift(a, f, bits);
      const double bias = lp_norm(sub(mean(lift.exact), mean(lift.quantized)));
      viol = std::max(viol, bias - std::ldexp(1.0, 1 - bits));
      viol = std::max(viol, lp_norm(sub(mean(lift.exact), weighted_means(a, f))) - 1e-14);
    }
    record("lift-bias", viol, 1e-15);
  }

  {  // tiling identity
    Rng rng = make_rng(seed, 3);
    double viol = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = p_choices[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      const LpSpec space = make_space(p, uniform_int(rng, 1, 4));
      const std::int64_t N1 = uniform_int(rng, 1, 8);
      const std::int64_t N = N1 + uniform_int(rng, 0, static_cast<int>(2 * N1) + 2);
      const TabFn a = random_vector_tabfn(N1, space, rng);
      const TabFn f = random_scalar_tabfn(N1, rng);
      const TiledWeights tiled = tile_weights(a, N);
      const VecX lhs = weighted_means(tiled.weights, tiled.lift(f));
      const VecX rhs = scaled(weighted_means(a, f), tiled.factor);
      viol = std::max(viol, lp_norm(sub(lhs, rhs)));
    }
    record("tiling-identity", viol, 1e-12);
  }

  {  // dimension embedding: isometry, contractive projection, left inverse
    Rng rng = make_rng(seed, 4);
    double viol = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = p_choices[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      const std::int64_t M1 = uniform_int(rng, 1, 6);
      const std::int64_t M = M1 + uniform_int(rng, 0, 10);
      std::vector<double> c(static_cast<std::size_t>(M1));
      for (double& x : c) x = uniform(rng, -2.0, 2.0);
      const VecX g = make_vec(std::move(c), make_space(p, M1));
      const VecX up = dimension_embed(g, M);
      viol = std::max(viol, std::abs(lp_norm(up) - lp_norm(g)));
      viol = std::max(viol, lp_norm(sub(dimension_project(up, M1), g)));
      std::vector<double> h(static_cast<std::size_t>(M));
      for (double& x : h) x = uniform(rng, -2.0, 2.0);
      const VecX big = make_vec(std::move(h), make_space(p, M));
      viol = std::max(viol, lp_norm(dimension_project(big, M1)) - lp_norm(big));
    }
    record("dimension-embedding", viol, 1e-12);
  }

  {  // sign-matrix involution, exact in integers
    Rng rng = make_rng(seed, 5);
    double viol = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const std::int64_t N1 = std::int64_t{1} << k;
      std::vector<double> v(static_cast<std::size_t>(N1));
      for (double& x : v) x = uniform_int(rng, -3, 3);
      std::vector<double> u = v;
      walsh_apply(u);
      if (fault == FaultInject::walsh_flip && k == 4) u[1] += 1e-6;
      walsh_apply(u);
      const WalshMatrix W(std::min(k, 8));
      for (std::int64_t i = 0; i < N1; ++i)
        viol = std::max(viol, std::abs(u[static_cast<std::size_t>(i)] -
                                       static_cast<double>(N1) * v[static_cast<std::size_t>(i)]));
      // fast transform agrees with the materialized matrix
      std::vector<double> w1 = W.multiply(v), w2 = v;
      walsh_apply(w2);
      for (std::int64_t i = 0; i < N1; ++i)
        viol = std::max(viol, std::abs(w1[static_cast<std::size_t>(i)] - w2[static_cast<std::size_t>(i)]));
    }
    record("walsh-involution", viol, 0.0);
  }

  {  // applying the sign matrix to the weighted means recovers the values
    Rng rng = make_rng(seed, 6);
    double viol = 0.0;
    const int k = 6;
    const TabFn a = walsh_weights(k);
    const TabFn f = random_scalar_tabfn(a.domain_size(), rng);
    std::vector<double> g = weighted_means(a, f).coords;
    walsh_apply(g);
    for (std::int64_t i = 0; i < a.domain_size(); ++i)
      viol = std::max(viol, std::abs(g[static_cast<std::size_t>(i)] - f.scalar_at(i)));
    record("walsh-mean-identity", viol, 1e-9);
  }

  {  // unit-vector weights reproduce the value vector up to the known scale
    Rng rng = make_rng(seed, 7);
    double viol = 0.0;
    for (double p : p_choices) {
      const std::int64_t N = 8;
      const TabFn a = unit_vector_weights(p, N);
      const TabFn f = random_scalar_tabfn(N, rng);
      const VecX t = weighted_means(a, f);
      const double scale =
          std::isinf(p) ? 1.0 / static_cast<double>(N)
                        : std::pow(static_cast<double>(N), 1.0 / p - 1.0);
      for (std::int64_t j = 0; j < N; ++j)
        viol = std::max(viol, std::abs(t.coords[static_cast<std::size_t>(j)] -
                                       scale * f.scalar_at(j)));
    }
    record("unitvec-identity", viol, 1e-12);
  }

  {  // net: contraction, resolution bound, grid fixed points
    Rng rng = make_rng(seed, 8);
    double viol = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double p = p_choices[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      const LpSpec space = make_space(p, uniform_int(rng, 1, 3));
      const int k = 1 << uniform_int(rng, 0, 3);
      const FiniteImageMap theta = ball_net_map(space, k);
      VecX x = random_vector_tabfn(1, space, rng).values[0];
      if (it % 2) x = scaled(x, 2.0);  // exercise the radial clamp
      const VecX y = theta.map(x);
      viol = std::max(viol, lp_norm(y) - std::min(1.0, lp_norm(x)) - 1e-12);
      if (lp_norm(x) <= 1.0)
        viol = std::max(viol, lp_norm(sub(x, y)) - 1.0 / k - 1e-12);
      // grid point: must be exactly fixed
      const VecX g = theta.image[uniform_index(rng, theta.image.size())];
      const VecX gy = theta.map(g);
      for (std::int64_t i = 0; i < space.dim; ++i)
        viol = std::max(viol, std::abs(gy.coords[static_cast<std::size_t>(i)] -
                                       g.coords[static_cast<std::size_t>(i)]));
    }
    record("net-contraction", viol, 0.0);
  }

  {  // transcription matrix
    const MatrixResult mr = compile_case_matrix(seed);
    record("compile-distribution", mr.max_tv, 1e-9);
    record("compile-query-counts", mr.query_counts_ok ? 0.0 : 1.0, 0.0);
  }

  {  // norm preservation along long random circuits with interleaved queries
    Rng rng = make_rng(seed, 9);
    const int m = 6;
    const TabFn f = random_scalar_tabfn(4, rng);
    const QuantumQuery q = make_query(
        m, 2, 2, {0, 1, 2, 3}, [](std::uint64_t i) { return static_cast<std::int64_t>(i); },
        [](const VecX& v) { return quantize_real(v.scalar(), 2); });
    QState s = QState::basis(m, 0);
    for (int step = 0; step < 1000; ++step) {
      const int kind = uniform_int(rng, 0, 4);
      if (kind == 0) {
        const double th = uniform(rng, 0.0, 6.28318530717958648);
        const double p1 = uniform(rng, 0.0, 6.28318530717958648);
        const double p2 = uniform(rng, 0.0, 6.28318530717958648);
        const Amp u00 = std::polar(std::cos(th), p1), u01 = std::polar(std::sin(th), p2);
        const Amp u10 = -std::conj(u01), u11 = std::conj(u00);
        s = apply_unitary(make_single_qubit(uniform_int(rng, 0, m - 1), {u00, u01, u10, u11}), s);
      } else if (kind == 1) {
        const int c = uniform_int(rng, 0, m - 1);
        int t = uniform_int(rng, 0, m - 2);
        if (t >= c) ++t;
        s = apply_unitary(gates::cnot(c, t), s);
      } else if (kind == 2) {
        const std::uint64_t mask = rng() & ((1ull << m) - 1);
        s = apply_unitary(make_permutation([mask](std::uint64_t i) { return i ^ mask; }), s);
      } else if (kind == 3) {
        s = apply_unitary(make_inverse_qft(uniform_int(rng, 0, m - 3), uniform_int(rng, 1, 2)), s);
      } else {
        s = apply_query(q, f, s);
      }
    }
    record("state-norm-drift", std::abs(s.norm_sq() - 1.0), 1e-10);
  }

  {  // one-wire value register: applying the same query twice is the identity
    Rng rng = make_rng(seed, 10);
    const int m = 5;
    const TabFn f = random_boolean_tabfn(4, rng);
    const QuantumQuery q = make_query(
        m, 2, 1, {0, 1, 2, 3}, [](std::uint64_t i) { return static_cast<std::int64_t>(i); },
        [](const VecX& v) { return static_cast<std::uint64_t>(v.scalar()); });
    AmpMap amps;
    double nrm = 0.0;
    for (int i = 0; i < 8; ++i) {
      const Amp a{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
      amps[uniform_index(rng, 1ull << m)] += a;
      }
    for (auto& [idx, a] : amps) nrm += std::norm(a);
    for (auto& [idx, a] : amps) a /= std::sqrt(nrm);
    const QState s0 = QState::from_amplitudes(m, amps);
    const QState s2 = apply_query(q, f, apply_query(q, f, s0));
    double viol = s0.amplitudes().size() == s2.amplitudes().size() ? 0.0 : 1.0;
    for (const auto& [idx, a] : s0.amplitudes()) {
      auto it = s2.amplitudes().find(idx);
      if (it == s2.amplitudes().end()) { viol = 1.0; break; }
      viol = std::max(viol, std::abs(it->second - a));
    }
    record("query-mod2-involution", viol, 0.0);
  }

  {  // three-quarters of the mass within four expected errors, exactly
    Rng rng = make_rng(seed, 11);
    double worst_gap = 0.0;  // 3/4 minus the achieved mass, positive = failure
    for (int it = 0; it < 50; ++it) {
      const std::int64_t N = uniform_int(rng, 2, 6);
      const int n = uniform_int(rng, 1, 3);
      const int K = uniform_int(rng, 1, 6);
      const RandomizedAlg alg = random_restricted_alg(N, n, K, rng);
      const TabFn f = random_scalar_tabfn(N, rng);
      const auto dist = error_distribution(alg, f, mean(f));
      double expect = 0.0;
      for (const auto& [err, w] : dist) expect += err * w;
      double mass = 0.0;
      for (const auto& [err, w] : dist)
        if (err <= 4.0 * expect + 1e-15) mass += w;
      worst_gap = std::max(worst_gap, 0.75 - mass);
    }
    record("confidence-mass", worst_gap, 0.0);
  }

  {  // explicit mixture and direct sampling agree on the expected error
    Rng rng = make_rng(seed, 12);
    const std::int64_t N = 5;
    const RandomizedAlg alg = mc_mean_explicit(N, 2);
    const TabFn f = random_scalar_tabfn(N, rng);
    auto sol = [](const TabFn& g) { return mean(g); };
    const ErrorEstimate exact = randomized_error(alg, sol, {f});
    RandomizedErrorOptions opt;
    opt.force_sampled = true;
    opt.trials = 20000;
    opt.seed = seed;
    const ErrorEstimate sampled = randomized_error(alg, sol, {f}, opt);
    record("estimator-dual-route",
           std::abs(exact.value - sampled.value) - 4.5 * sampled.halfwidth, 0.0);
  }

  {  // shared node draws: scalar mean path and weighted path bitwise equal
    Rng r1 = make_rng(seed, 13), r2 = make_rng(seed, 13), rf = make_rng(seed, 14);
    const std::int64_t N = 64;
    const TabFn f = random_scalar_tabfn(N, rf);
    const TabFn ones = constant_scalar_tabfn(N, 1.0);
    double viol = 0.0;
    for (int it = 0; it < 50; ++it) {
      const VecX e1 = mc_mean_estimate(f, 7, r1);
      const VecX e2 = mc_weighted_means(ones, f, 7, r2);
      viol = std::max(viol, std::abs(e1.scalar() - e2.scalar()));
    }
    record("mc-shared-draws", viol, 0.0);
  }

  return out;
}

inline ordered_json fidelity_to_json(const std::vector<CheckResult>& checks) {
  ordered_json arr = ordered_json::array();
  for (const CheckResult& c : checks) {
    ordered_json j;
    j["name"] = c.name;
    j["observed"] = c.observed;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline void write_fidelity_csv(const std::vector<CheckResult>& checks, std::ostream& os) {
  os << "name,observed,tolerance,pass\n";
  for (const CheckResult& c : checks)
    os << c.name << ',' << detail::fmt17(c.observed) << ',' << detail::fmt17(c.tolerance) << ','
       << (c.pass ? 1 : 0) << '\n';
}

}  // namespace vvmc
