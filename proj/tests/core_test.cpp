#include <gtest/gtest.h>

#include <cmath>

#include <cyclegap/core.hpp>
#include <cyclegap/linalg.hpp>

namespace cyclegap {
namespace {

TEST(VecHelpers, DotNormDistance) {
  const Vec u = {1.0, 2.0, 3.0};
  const Vec v = {4.0, -5.0, 6.0};
  EXPECT_DOUBLE_EQ(dot(u, v), 4.0 - 10.0 + 18.0);
  EXPECT_DOUBLE_EQ(norm(std::span<const double>(u)), std::sqrt(14.0));
  EXPECT_DOUBLE_EQ(distance(std::span<const double>(u), std::span<const double>(v)),
                   std::sqrt(9.0 + 49.0 + 9.0));
}

TEST(VecHelpers, MismatchThrows) {
  const Vec u = {1.0, 2.0};
  const Vec v = {1.0};
  EXPECT_THROW(dot(u, v), DimensionError);
  EXPECT_THROW(u + v, DimensionError);
  EXPECT_THROW(u - v, DimensionError);
}

TEST(VecHelpers, Arithmetic) {
  const Vec u = {1.0, 2.0};
  const Vec v = {3.0, 5.0};
  EXPECT_EQ(u + v, (Vec{4.0, 7.0}));
  EXPECT_EQ(v - u, (Vec{2.0, 3.0}));
  EXPECT_EQ(2.0 * u, (Vec{2.0, 4.0}));
}

TEST(Tolerances, DefaultsArePinned) {
  const Tolerances& t = default_tolerances();
  EXPECT_DOUBLE_EQ(t.feas, 1e-9);
  EXPECT_DOUBLE_EQ(t.linear, 1e-10);
  EXPECT_DOUBLE_EQ(t.solver, 1e-8);
  EXPECT_DOUBLE_EQ(t.cone, 1e-10);
  EXPECT_DOUBLE_EQ(t.identity, 1e-10);
  EXPECT_DOUBLE_EQ(t.max_condition, 1e12);
}

TEST(ProductVecTest, ConstructionAndBlocks) {
  ProductVec x(3, 2);
  EXPECT_EQ(x.blocks(), 3);
  EXPECT_EQ(x.dim(), 2);
  for (double v : x.flat()) EXPECT_EQ(v, 0.0);

  x.block(1)[0] = 5.0;
  x.block(2)[1] = -7.0;
  EXPECT_EQ(x.flat(), (Vec{0, 0, 5, 0, 0, -7}));
  EXPECT_EQ(x.block_vec(1), (Vec{5.0, 0.0}));
}

TEST(ProductVecTest, FromBlocksAndFlat) {
  const ProductVec a = ProductVec::from_blocks({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(a.blocks(), 2);
  EXPECT_EQ(a.dim(), 2);
  EXPECT_EQ(a.flat(), (Vec{1, 2, 3, 4}));

  const ProductVec b = ProductVec::from_flat(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(a.flat(), b.flat());

  EXPECT_THROW(ProductVec::from_flat(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_THROW(ProductVec::from_blocks({{1.0}, {1.0, 2.0}}), DimensionError);
}

TEST(ProductVecTest, ArithmeticAndShapeChecks) {
  ProductVec a = ProductVec::from_flat(2, 1, {1, 2});
  const ProductVec b = ProductVec::from_flat(2, 1, {10, 20});
  a += b;
  EXPECT_EQ(a.flat(), (Vec{11, 22}));
  a -= b;
  EXPECT_EQ(a.flat(), (Vec{1, 2}));
  a *= 3.0;
  EXPECT_EQ(a.flat(), (Vec{3, 6}));
  EXPECT_EQ((2.0 * b).flat(), (Vec{20, 40}));
  EXPECT_EQ((a + b).flat(), (Vec{13, 26}));
  EXPECT_EQ((b - a).flat(), (Vec{7, 14}));

  const ProductVec c(1, 2);
  EXPECT_FALSE(a.same_shape(c));
  EXPECT_THROW(a += c, DimensionError);
  EXPECT_THROW(inner_product(a, c), DimensionError);
}

TEST(ProductVecTest, InnerProductMatchesFlat) {
  const ProductVec a = ProductVec::from_flat(2, 2, {1, 2, 3, 4});
  const ProductVec b = ProductVec::from_flat(2, 2, {5, 6, 7, 8});
  EXPECT_DOUBLE_EQ(inner_product(a, b), 5.0 + 12.0 + 21.0 + 32.0);
  EXPECT_DOUBLE_EQ(norm(a), std::sqrt(30.0));
  EXPECT_DOUBLE_EQ(distance(a, b), 8.0);
}

TEST(DenseMatrixTest, IdentityAndApply) {
  const DenseMatrix eye = DenseMatrix::identity(3);
  const Vec x = {1.0, -2.0, 5.0};
  EXPECT_EQ(eye.apply(x), x);

  DenseMatrix m(2, 3);
  m.at(0, 0) = 1.0;
  m.at(0, 2) = 2.0;
  m.at(1, 1) = -1.0;
  EXPECT_EQ(m.apply(x), (Vec{11.0, 2.0}));
  EXPECT_THROW(m.apply(Vec{1.0, 2.0}), DimensionError);
  EXPECT_THROW(DenseMatrix(0, 2), DimensionError);
}

TEST(LuSolverTest, SolvesKnownSystem) {
  DenseMatrix m(2, 2);
  m.at(0, 0) = 2.0;
  m.at(0, 1) = 1.0;
  m.at(1, 0) = 1.0;
  m.at(1, 1) = 3.0;
  const Vec x = solve_dense(m, {5.0, 10.0});
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 3.0, 1e-12);
}

TEST(LuSolverTest, RandomRoundTripWithinLinearTolerance) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 6;
    DenseMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m.at(i, j) = rng.normal();
      m.at(i, i) += d + 2.0;  // diagonally dominant, well conditioned
    }
    const Vec x_true = rng.normal_vec(d);
    const Vec b = m.apply(x_true);
    const LuSolver lu(m);
    const Vec x = lu.solve(b);
    EXPECT_GE(lu.condition(), 1.0);
    EXPECT_LE(distance(std::span<const double>(x), std::span<const double>(x_true)),
              default_tolerances().linear * (1.0 + norm(std::span<const double>(x_true))));
  }
}

TEST(LuSolverTest, SingularAndIllConditionedThrow) {
  DenseMatrix singular(2, 2);
  singular.at(0, 0) = 1.0;
  singular.at(0, 1) = 2.0;
  singular.at(1, 0) = 2.0;
  singular.at(1, 1) = 4.0;
  EXPECT_THROW(LuSolver{singular}, SolverError);

  DenseMatrix nearly(2, 2);
  nearly.at(0, 0) = 1.0;
  nearly.at(0, 1) = 1.0;
  nearly.at(1, 0) = 1.0;
  nearly.at(1, 1) = 1.0 + 1e-14;
  EXPECT_THROW(LuSolver{nearly}, SolverError);

  DenseMatrix rect(2, 3);
  EXPECT_THROW(LuSolver{rect}, DimensionError);
}

TEST(LuSolverTest, SolveChecksLength) {
  const LuSolver lu(DenseMatrix::identity(3));
  EXPECT_THROW(lu.solve(Vec{1.0, 2.0}), DimensionError);
}

TEST(RngTest, DeterministicGivenSeed) {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(), b.normal());
  }
  Rng c(124);
  bool any_diff = false;
  Rng a2(123);
  for (int i = 0; i < 10; ++i) any_diff = any_diff || (a2.uniform() != c.uniform());
  EXPECT_TRUE(any_diff);
}

TEST(RngTest, UniformRangeAndNormalMoments) {
  Rng rng(2024);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double g = rng.normal();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / trials;
  const double var = sum_sq / trials - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.05);

  const double lo = rng.uniform(-3.0, -1.0);
  EXPECT_GE(lo, -3.0);
  EXPECT_LT(lo, -1.0);
}

TEST(RngTest, ProductShapeAndDeterminism) {
  Rng a(9);
  Rng b(9);
  const ProductVec x = a.normal_product(3, 4);
  const ProductVec y = b.normal_product(3, 4);
  EXPECT_EQ(x.blocks(), 3);
  EXPECT_EQ(x.dim(), 4);
  EXPECT_EQ(x.flat(), y.flat());
}

TEST(ErrorsTest, HierarchyAndMessages) {
  try {
    throw DimensionError("shape oops");
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "shape oops");
  }
  EXPECT_THROW(throw SolverError("s"), Error);
  EXPECT_THROW(throw ConfigError("c"), Error);
}

TEST(LoggingTest, FormatVec) {
  const Vec v = {1.0, 2.5};
  EXPECT_EQ(format_vec(std::span<const double>(v)), "(1, 2.5)");
}

}  // namespace
}  // namespace cyclegap
