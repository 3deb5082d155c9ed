#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <cyclegap/solver.hpp>
#include <cyclegap/verify.hpp>

namespace cyclegap {
namespace {

ConvexSet interval(double lo, double hi) { return ConvexSet::box({lo}, {hi}); }

ConvexSet two_intervals() {
  return ConvexSet::product({interval(-1.0, 1.0), interval(3.0, 5.0)});
}

ConvexSet three_singletons() {
  return ConvexSet::product({ConvexSet::singleton({0.0}), ConvexSet::singleton({10.0}),
                             ConvexSet::singleton({-2.0})});
}

ConvexSet halfspace_ball() {
  return ConvexSet::product(
      {ConvexSet::halfspace({0.0, 1.0}, 0.0), ConvexSet::ball({0.0, 2.0}, 1.0)});
}

void expect_pass_consistent(const CheckResult& c) {
  EXPECT_EQ(c.pass, c.violation <= c.tolerance) << c.name;
}

TEST(CheckCycle, AcceptsTrueCycleRejectsImpostor) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const ProductVec d = ProductVec::from_flat(2, 1, {2.0, -2.0});

  const CycleCheck good =
      check_cycle(ops, c, ProductVec::from_flat(2, 1, {1.0, 3.0}), d, 1e-8);
  EXPECT_TRUE(good.is_cycle);
  EXPECT_LE(good.residual, 1e-12);

  // Feasible tuple with the wrong difference: both forms see residual 1.
  const CycleCheck bad =
      check_cycle(ops, c, ProductVec::from_flat(2, 1, {0.0, 3.0}), d, 1e-8);
  EXPECT_FALSE(bad.is_cycle);
  EXPECT_NEAR(bad.residual, 1.0, 1e-12);
}

TEST(CheckCycle, ThreeBlocks) {
  const CycleOperators ops(3, 1);
  const CycleCheck res = check_cycle(ops, three_singletons(),
                                     ProductVec::from_flat(3, 1, {0.0, 10.0, -2.0}),
                                     ProductVec::from_flat(3, 1, {-2.0, -10.0, 12.0}), 1e-8);
  EXPECT_TRUE(res.is_cycle);
  EXPECT_EQ(res.residual, 0.0);
}

TEST(CheckCycle, FormDisagreementThrows) {
  // A true fixed point paired with a fabricated displacement: the fixed-point
  // form passes while the difference form misses by 2, an internal
  // inconsistency that must not be reported as a clean boolean.
  const CycleOperators ops(2, 1);
  EXPECT_THROW(check_cycle(ops, two_intervals(), ProductVec::from_flat(2, 1, {1.0, 3.0}),
                           ProductVec(2, 1), 1e-8),
               SolverError);
}

TEST(CheckCycle, RequiresProductSet) {
  const CycleOperators ops(2, 1);
  EXPECT_THROW(
      check_cycle(ops, ConvexSet::ball({0.0, 0.0}, 1.0), ProductVec(2, 1), ProductVec(2, 1), 1e-8),
      ConfigError);
}

TEST(PthmEquivalence, AgreesOnCycleAndNonCycleProbes) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  ASSERT_TRUE(gap.converged);

  std::vector<ProductVec> probes;
  probes.push_back(ProductVec::from_flat(2, 1, {1.0, 3.0}));   // all three true
  probes.push_back(ProductVec::from_flat(2, 1, {0.5, 4.5}));   // all three false
  Rng rng(17);
  for (int i = 0; i < 50; ++i) probes.push_back(c.project(3.0 * rng.normal_product(2, 1)));

  const CheckResult res = check_pthm_equivalence(ops, c, gap.d, probes);
  expect_pass_consistent(res);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.details.at("disagreements"), 0.0);
  EXPECT_EQ(res.details.at("probes"), static_cast<double>(probes.size()));
  EXPECT_TRUE(res.witnesses.empty());
}

TEST(PthmEquivalence, FlagsDisagreementAgainstWrongDisplacement) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  // The true cycle is a fixed point and admissible, but its difference
  // misses this displacement, so classifications split.
  const ProductVec wrong_d = ProductVec::from_flat(2, 1, {2.1, -2.1});
  const std::vector<ProductVec> probes = {ProductVec::from_flat(2, 1, {1.0, 3.0})};

  const CheckResult res = check_pthm_equivalence(ops, c, wrong_d, probes);
  expect_pass_consistent(res);
  EXPECT_FALSE(res.pass);
  EXPECT_EQ(res.details.at("disagreements"), 1.0);
  EXPECT_NEAR(res.violation, 1e-5, 1e-12);  // margin of the nearest threshold
  EXPECT_FALSE(res.witnesses.empty());
}

TEST(TranslateOffsets, AccumulatesTrailingBlocks) {
  const ProductVec v = ProductVec::from_flat(3, 1, {10.0, -12.0, 2.0});
  const auto offsets = detail::translate_offsets(v);
  ASSERT_EQ(offsets.size(), 2u);
  EXPECT_EQ(offsets[0], (Vec{-2.0}));   // v0 + v1
  EXPECT_EQ(offsets[1], (Vec{-12.0}));  // v1
}

TEST(VerifyGeometry, TwoIntervalsBothDirections) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  const CycleResult cyc = km_fixed_point(ops, c, ProductVec(2, 1));
  ASSERT_TRUE(gap.converged);
  ASSERT_TRUE(cyc.converged);

  const CheckResult res = verify_geometry(ops, c, gap, {cyc});
  expect_pass_consistent(res);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.details.at("forward_cycles"), 1.0);
  EXPECT_GE(res.details.at("reverse_members"), 1.0);
  EXPECT_LE(res.details.at("reconstruction_defect"), 1e-12);
}

TEST(VerifyGeometry, SingletonsCollapseToOnePoint) {
  const CycleOperators ops(3, 1);
  const ConvexSet c = three_singletons();
  const GapResult gap = dr_gap_solve(ops, c);
  const CycleResult cyc = km_fixed_point(ops, c, ProductVec(3, 1));
  const CheckResult res = verify_geometry(ops, c, gap, {cyc});
  EXPECT_TRUE(res.pass);
  EXPECT_GE(res.details.at("reverse_members"), 1.0);
}

TEST(VerifyGeometry, RequiresConvergedGap) {
  const CycleOperators ops(2, 1);
  GapResult gap;
  gap.converged = false;
  EXPECT_THROW(verify_geometry(ops, two_intervals(), gap, {}), ConfigError);
}

TEST(VerifyGeometry, RejectsMistranslatedIntersection) {
  // With a corrupted gap vector the translated intersection grows fat and
  // contains points whose reconstruction is not a cycle.
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  GapResult gap;
  gap.d = ProductVec::from_flat(2, 1, {2.5, -2.5});
  gap.e = ops.apply_Q(gap.d);
  gap.v = gap_vector(ops, gap.d);
  gap.converged = true;

  const CheckResult res = verify_geometry(ops, c, gap, {});
  expect_pass_consistent(res);
  EXPECT_FALSE(res.pass);
  EXPECT_GE(res.violation, 0.2);
  EXPECT_FALSE(res.witnesses.empty());
}

TEST(SaddleCheck, CertifiesComputedDisplacement) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  ASSERT_TRUE(gap.converged);

  const CheckResult res = saddle_check(ops, c, gap);
  expect_pass_consistent(res);
  EXPECT_TRUE(res.pass);
  EXPECT_LE(res.details.at("diagonal_violation"), 1e-12);
  EXPECT_LE(res.details.at("certificate_violation"), 1e-6);
  EXPECT_GT(res.details.at("admissible_samples"), 2.0);
  EXPECT_EQ(res.details.count("degenerate"), 0u);
}

TEST(SaddleCheck, DetectsScaledDisplacement) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  GapResult gap = dr_gap_solve(ops, c);
  ASSERT_TRUE(gap.converged);
  gap.d = 1.05 * gap.d;  // no longer the maximizer

  const CheckResult res = saddle_check(ops, c, gap);
  expect_pass_consistent(res);
  EXPECT_FALSE(res.pass);
  // b = 0 exposes the miscalibration directly: f(0, d') = sigma(d') + ||d'||^2/2.
  EXPECT_NEAR(res.details.at("certificate_violation"), 0.21, 1e-9);
  EXPECT_FALSE(res.witnesses.empty());
}

TEST(SaddleCheck, DegeneratesGracefullyOnThinSupportCones) {
  // Every off-ray direction has unbounded support here, so no random draw is
  // admissible and the check falls back to {0, d}.
  const CycleOperators ops(2, 2);
  const ConvexSet c = halfspace_ball();
  const GapResult gap = dr_gap_solve(ops, c);
  ASSERT_TRUE(gap.converged);

  const CheckResult res = saddle_check(ops, c, gap);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.details.at("degenerate"), 1.0);
  EXPECT_EQ(res.details.at("admissible_samples"), 2.0);
}

TEST(SaddleCheck, RequiresConvergedGap) {
  const CycleOperators ops(2, 1);
  GapResult gap;
  EXPECT_THROW(saddle_check(ops, two_intervals(), gap), ConfigError);
}

TEST(DBoundCheck, HoldsForComputedDisplacement) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  const CheckResult res = d_bound_check(ops, c, gap);
  expect_pass_consistent(res);
  EXPECT_TRUE(res.pass);
  EXPECT_NEAR(res.details.at("d_norm"), 2.0 * std::sqrt(2.0), 1e-9);
}

TEST(DBoundCheck, FlagsOversizedDisplacement) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  GapResult gap = dr_gap_solve(ops, c);
  gap.d = ProductVec::from_flat(2, 1, {12.0, -12.0});

  const CheckResult res = d_bound_check(ops, c, gap);
  expect_pass_consistent(res);
  EXPECT_FALSE(res.pass);
  EXPECT_GT(res.violation, 1.0);
  EXPECT_FALSE(res.witnesses.empty());
}

TEST(CheckCyclesEntry, PassesOnSolvedFixture) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  const CycleResult cyc = km_fixed_point(ops, c, ProductVec(2, 1));
  const CheckResult res = check_cycles_entry(ops, c, {cyc}, gap);
  expect_pass_consistent(res);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.details.at("cycles_checked"), 1.0);
  EXPECT_LE(res.details.at("gap_vector_sum"), 1e-12);
}

TEST(CheckCyclesEntry, SkipsUnconvergedCycles) {
  const CycleOperators ops(2, 1);
  const ConvexSet c = two_intervals();
  const GapResult gap = dr_gap_solve(ops, c);
  CycleResult stuck;
  stuck.z = ProductVec(2, 1);
  stuck.converged = false;
  const CheckResult res = check_cycles_entry(ops, c, {stuck}, gap);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.details.at("cycles_checked"), 0.0);
}

TEST(EquivalenceProbes, FeasibleDeterministicAndCounted) {
  const CycleOperators ops(2, 2);
  const ConvexSet c = halfspace_ball();
  const CycleResult cyc = km_fixed_point(ops, c, ProductVec(2, 2));
  ASSERT_TRUE(cyc.converged);

  const auto probes = make_equivalence_probes(ops, c, {cyc}, 50, 9);
  EXPECT_GE(probes.size(), 50u);
  for (const ProductVec& p : probes) {
    EXPECT_TRUE(c.contains(p, default_tolerances().feas));
  }
  const auto again = make_equivalence_probes(ops, c, {cyc}, 50, 9);
  ASSERT_EQ(probes.size(), again.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_EQ(probes[i].flat(), again[i].flat());
  }
}

}  // namespace
}  // namespace cyclegap
