#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "vvmc/distribution.hpp"
#include "vvmc/experiment.hpp"
#include "vvmc/generators.hpp"
#include "vvmc/qcompile.hpp"

using namespace vvmc;

TEST(FiniteImageMapTest, SortsAndDeduplicatesImage) {
  auto id = [](const VecX& v) { return v; };
  const FiniteImageMap theta = finite_image_map(
      id, {scalar_vec(0.5), scalar_vec(-1.0), scalar_vec(0.5), scalar_vec(0.0)});
  ASSERT_EQ(theta.image.size(), 3u);
  EXPECT_DOUBLE_EQ(theta.image[0].scalar(), -1.0);
  EXPECT_DOUBLE_EQ(theta.image[1].scalar(), 0.0);
  EXPECT_DOUBLE_EQ(theta.image[2].scalar(), 0.5);
  EXPECT_THROW(finite_image_map(id, {}), std::invalid_argument);
  EXPECT_THROW(finite_image_map(nullptr, {scalar_vec(0.0)}), std::invalid_argument);
}

TEST(FiniteImageMapTest, ApplyPointwise) {
  const FiniteImageMap theta = scalar_bin_map(2);
  // Two levels: midpoints -1/2 and 1/2, split at zero.
  const TabFn f = scalar_tabfn({-0.9, -0.1, 0.2, 1.0});
  const TabFn g = apply_pointwise(theta, f);
  EXPECT_DOUBLE_EQ(g.scalar_at(0), -0.5);
  EXPECT_DOUBLE_EQ(g.scalar_at(1), -0.5);
  EXPECT_DOUBLE_EQ(g.scalar_at(2), 0.5);
  EXPECT_DOUBLE_EQ(g.scalar_at(3), 0.5);
}

TEST(BallNetTest, ScalarGridAndRounding) {
  const FiniteImageMap net = ball_net_map(scalar_space(), 4);
  ASSERT_EQ(net.image.size(), 9u);  // -1, -3/4, ..., 3/4, 1
  EXPECT_DOUBLE_EQ(net.image[0].scalar(), -1.0);
  EXPECT_DOUBLE_EQ(net.image[8].scalar(), 1.0);
  // Rounding is toward zero in steps of 1/4; out-of-ball inputs are clamped.
  EXPECT_DOUBLE_EQ(net.map(scalar_vec(0.3)).scalar(), 0.25);
  EXPECT_DOUBLE_EQ(net.map(scalar_vec(-0.3)).scalar(), -0.25);
  EXPECT_DOUBLE_EQ(net.map(scalar_vec(0.999)).scalar(), 0.75);
  EXPECT_DOUBLE_EQ(net.map(scalar_vec(1.7)).scalar(), 1.0);
  // Grid points map to themselves exactly.
  for (const VecX& g : net.image) EXPECT_EQ(net.map(g).scalar(), g.scalar());
}

TEST(BallNetTest, VectorContractionBound) {
  Rng rng = make_rng(3);
  for (double p : {1.0, 2.0, kPInf}) {
    const LpSpec space = make_space(p, 3);
    const int k = 5;
    const FiniteImageMap net = ball_net_map(space, k);
    for (int it = 0; it < 200; ++it) {
      const VecX x = random_vector_tabfn(1, space, rng).at(0);
      const VecX y = net.map(x);
      EXPECT_LE(lp_norm(y), 1.0 + 1e-12);
      // Coordinatewise rounding moves nothing farther than one grid step, and
      // the normalized norm of a vector is at most its largest coordinate.
      EXPECT_LE(lp_norm(sub(x, y)), 1.0 / k + 1e-12);
    }
  }
  EXPECT_THROW(ball_net_map(make_space(2.0, 20), 10), std::invalid_argument);
}

TEST(CompileWidthsTest, HandValues) {
  Rng rng = make_rng(5);
  {
    // Zero queries, one branch, five image points: 1 + 1 + max(0,1)*3 wires.
    const RandomizedAlg alg = random_restricted_alg(4, 0, 1, rng);
    const FiniteImageMap theta = scalar_bin_map(5);
    const CompileWidths w = compile_widths(alg, theta);
    EXPECT_EQ(w.counter_bits, 1);
    EXPECT_EQ(w.branch_bits, 1);
    EXPECT_EQ(w.value_bits, 3);
    EXPECT_EQ(w.total, 5);
  }
  {
    const RandomizedAlg alg = random_restricted_alg(4, 5, 3, rng);
    const FiniteImageMap theta = scalar_bin_map(4);
    const CompileWidths w = compile_widths(alg, theta);
    EXPECT_EQ(w.counter_bits, 3);  // ceil(log2 5)
    EXPECT_EQ(w.branch_bits, 2);
    EXPECT_EQ(w.value_bits, 2);
    EXPECT_EQ(w.total, 15);
  }
}

// The transcription runs its branches in superposition: the final state must
// be exactly sum_omega sqrt(P(omega)) |0>|omega>|code(t_1)>...|code(t_n)>.
TEST(CompileTest, FinalStateLayout) {
  Rng rng = make_rng(7);
  const std::int64_t N = 5;
  const int n = 3;
  const RandomizedAlg alg = random_restricted_alg(N, n, 2, rng);
  const FiniteImageMap theta = scalar_bin_map(4);
  const TabFn f = random_scalar_tabfn(N, rng);
  const QuantumAlgorithm q = compile_to_quantum(alg, theta);
  const CompileWidths w = compile_widths(alg, theta);

  auto code_of = [&](std::int64_t t) -> std::uint64_t {
    const VecX v = theta.map(f.at(t));
    for (std::size_t i = 0; i < theta.image.size(); ++i)
      if (theta.image[i].coords == v.coords) return i;
    ADD_FAILURE() << "value not in image";
    return 0;
  };

  const QState s = run_state(q, f);
  ASSERT_EQ(s.amplitudes().size(), 2u);
  for (std::int64_t om = 0; om < 2; ++om) {
    std::uint64_t idx = 0;
    idx = reg_set(idx, w.total, 0, w.counter_bits, 0);  // counter ends at zero
    idx = reg_set(idx, w.total, w.counter_bits, w.branch_bits,
                  static_cast<std::uint64_t>(om));
    for (int r = 0; r < n; ++r) {
      const std::int64_t t = alg.branches[static_cast<std::size_t>(om)].nodes[
          static_cast<std::size_t>(r)];
      idx = reg_set(idx, w.total, w.counter_bits + w.branch_bits + r * w.value_bits,
                    w.value_bits, code_of(t));
    }
    const auto it = s.amplitudes().find(idx);
    ASSERT_NE(it, s.amplitudes().end()) << "omega=" << om;
    EXPECT_NEAR(it->second.real(),
                std::sqrt(alg.branches[static_cast<std::size_t>(om)].weight), 1e-12);
    EXPECT_NEAR(it->second.imag(), 0.0, 1e-15);
  }
}

TEST(CompileTest, QueryCountEqualsArity) {
  Rng rng = make_rng(9);
  const FiniteImageMap theta = scalar_bin_map(4);
  for (int n : {0, 1, 2, 5}) {
    const RandomizedAlg alg = random_restricted_alg(6, n, 3, rng);
    const QuantumAlgorithm q = compile_to_quantum(alg, theta);
    EXPECT_EQ(q.query_count(), n);
  }
}

// Output distributions agree exactly with the classical mixture run on the
// discretized function, across arities including the no-query case.
TEST(CompileTest, DistributionMatchesClassicalMixture) {
  Rng rng = make_rng(11);
  const FiniteImageMap theta = scalar_bin_map(4);
  for (int n : {0, 1, 3}) {
    const RandomizedAlg alg = random_restricted_alg(6, n, 4, rng);
    const QuantumAlgorithm q = compile_to_quantum(alg, theta);
    for (int it = 0; it < 5; ++it) {
      const TabFn f = random_scalar_tabfn(6, rng);
      const auto classical = exact_output_distribution(alg, apply_pointwise(theta, f));
      const auto quantum = run_exact(q, f);
      EXPECT_LT(total_variation(classical, quantum), 1e-12) << "n=" << n;
    }
  }
}

TEST(CompileTest, PaddedRegistersStillMatch) {
  Rng rng = make_rng(13);
  const FiniteImageMap theta = scalar_bin_map(3);
  const RandomizedAlg alg = random_restricted_alg(5, 2, 3, rng);
  CompileOptions opt;
  opt.extra_counter_bits = 2;
  opt.extra_branch_bits = 1;
  opt.extra_value_bits = 1;
  const QuantumAlgorithm q = compile_to_quantum(alg, theta, opt);
  const TabFn f = random_scalar_tabfn(5, rng);
  const auto classical = exact_output_distribution(alg, apply_pointwise(theta, f));
  EXPECT_LT(total_variation(classical, run_exact(q, f)), 1e-12);
}

TEST(CompileTest, DecoderHandlesUnusedIndices) {
  Rng rng = make_rng(15);
  const FiniteImageMap theta = scalar_bin_map(3);  // 3 of 4 register codes used
  const RandomizedAlg alg = random_restricted_alg(4, 1, 3, rng);  // 3 of 4 branch codes
  const QuantumAlgorithm q = compile_to_quantum(alg, theta);
  const CompileWidths w = compile_widths(alg, theta);
  // A branch code outside the mixture decodes to the zero vector.
  const std::uint64_t bad_branch = reg_set(0, w.total, w.counter_bits, w.branch_bits, 3);
  EXPECT_DOUBLE_EQ(q.output(bad_branch).scalar(), 0.0);
  // An unused value code falls back to the first image point and still decodes.
  const std::uint64_t bad_code =
      reg_set(0, w.total, w.counter_bits + w.branch_bits, w.value_bits, 3);
  EXPECT_NO_THROW(q.output(bad_code));
}

TEST(CompileTest, WireCapIsEnforced) {
  Rng rng = make_rng(17);
  const RandomizedAlg alg = random_restricted_alg(4, 2, 2, rng);
  const FiniteImageMap theta = scalar_bin_map(4);
  CompileOptions opt;
  opt.extra_value_bits = 12;  // 1 + 1 + 2*14 wires, over the default cap
  EXPECT_THROW(compile_to_quantum(alg, theta, opt), resource_error);
}

TEST(CompileTest, MapValuesOutsideImageAreRejected) {
  Rng rng = make_rng(19);
  const RandomizedAlg alg = random_restricted_alg(4, 1, 2, rng);
  // Declared image {0}, but the map emits the input unchanged.
  const FiniteImageMap broken{[](const VecX& v) { return v; }, {scalar_vec(0.0)}};
  const QuantumAlgorithm q = compile_to_quantum(alg, broken);
  const TabFn f = constant_scalar_tabfn(4, 0.5);
  EXPECT_THROW(run_exact(q, f), contract_error);
}

TEST(CompileMatrixTest, FullCaseGridAgrees) {
  const MatrixResult r = compile_case_matrix(2026, 4);
  EXPECT_EQ(r.cases, 72);
  EXPECT_EQ(r.comparisons, 72 * 4);
  EXPECT_LT(r.max_tv, 1e-9);
  EXPECT_TRUE(r.query_counts_ok);
}
