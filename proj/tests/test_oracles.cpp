#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracafd/oracles.hpp"

using namespace fracafd;
using namespace fracafd::oracles;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

double normalized_kernel(const GramContext& ctx, const HalfSpacePoint& q, double z) {
  return ctx.kernel(q.t, q.x - z) / std::sqrt(norm_sq(ctx, q));
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

TEST(OracleGrid, ValidationAndNodes) {
  EXPECT_NO_THROW((OracleGrid{0.01, 50.0}.validate()));
  EXPECT_THROW((OracleGrid{1.0, 50.0}.validate()), DomainError);
  EXPECT_THROW((OracleGrid{0.0, 50.0}.validate()), DomainError);
  EXPECT_THROW((OracleGrid{0.01, -1.0}.validate()), DomainError);
  const auto nodes = OracleGrid{0.5, 50.0}.nodes();
  ASSERT_EQ(nodes.size(), 201u);
  EXPECT_EQ(nodes.front(), -50.0);
  EXPECT_EQ(nodes.back(), 50.0);
  EXPECT_EQ(nodes[100], 0.0);
}

TEST(ConvolutionGramOracle, ClassicalValues) {
  const OracleGrid grid{0.5, 200.0};
  // Gaussian: (4 pi * 2)^{-1/2}
  EXPECT_LE(rel_diff(convolution_gram_oracle(1.0, {1.0, 0.0}, {1.0, 0.0}, grid), 1.0 / std::sqrt(8.0 * kPi)), 1e-8);
  EXPECT_NEAR(convolution_gram_oracle(1.0, {1.0, 0.0}, {1.0, 0.0}, grid), 0.199471, 1e-6);
  // Cauchy: K_{1/2, 3}(2) = 3 / (13 pi)
  EXPECT_LE(rel_diff(convolution_gram_oracle(0.5, {1.0, 1.0}, {2.0, -1.0}, grid), 3.0 / (13.0 * kPi)), 1e-8);
}

TEST(ConvolutionGramOracle, AgreesWithSemigroupAtGeneralOrder) {
  const GramContext ctx(KernelFamily::heat(0.6));
  const HalfSpacePoint q{0.5, 0.0}, p{0.7, 1.0};
  EXPECT_LE(rel_diff(convolution_gram_oracle(0.6, q, p, {0.5, 200.0}), gram(ctx, q, p)), 1e-6);
  EXPECT_THROW(convolution_gram_oracle(0.6, {0.5, 0.0}, {0.7, 100.0}, {0.5, 50.0}), DomainError);
}

TEST(PlancherelGramOracle, ClassicalValues) {
  EXPECT_LE(rel_diff(plancherel_gram_oracle(1.0, {1.0, 0.0}, {1.0, 0.0}), 1.0 / (2.0 * kPi)), 1e-8);
  EXPECT_LE(rel_diff(plancherel_gram_oracle(1.0, {1.0, 0.0}, {2.0, 1.0}), 3.0 / (10.0 * kPi)), 1e-8);
  EXPECT_NEAR(plancherel_gram_oracle(1.0, {1.0, 0.0}, {2.0, 1.0}), 0.095493, 1e-6);
}

TEST(PlancherelGramOracle, AgreesWithSpatialGram) {
  const std::vector<std::pair<HalfSpacePoint, HalfSpacePoint>> pairs = {
      {{1.0, 0.0}, {0.5, 1.0}}, {{0.3, -0.7}, {1.2, 0.4}}, {{2.0, 1.5}, {0.8, -2.0}},
      {{0.6, 0.2}, {0.6, 3.0}}, {{1.5, -1.0}, {0.25, -0.5}}};
  for (double sigma : {0.7, 1.0, 1.5}) {
    const GramContext ctx(KernelFamily::poisson(sigma));
    for (const auto& [q, p] : pairs)
      EXPECT_LE(rel_diff(plancherel_gram_oracle(sigma, q, p), gram(ctx, q, p)), 1e-6)
          << sigma << " (" << q.t << "," << q.x << ") (" << p.t << "," << p.x << ")";
  }
}

TEST(FunctionalGramSchmidt, SingleKernel) {
  const auto gs = functional_gs_oracle(KernelFamily::heat(1.0), {{0.5, 0.3}}, {0.01, 30.0});
  ASSERT_EQ(gs.a_matrix.size(), 1u);
  EXPECT_NEAR(gs.a_matrix[0][0], 1.0, 1e-12);
  double sq = 0.0;
  for (double v : gs.orthonormal[0]) sq += v * v * 0.01;
  EXPECT_NEAR(sq, 1.0, 1e-12);
}

TEST(FunctionalGramSchmidt, SeparatedKernelsGiveIdentity) {
  const auto gs = functional_gs_oracle(KernelFamily::heat(1.0), {{0.2, -10.0}, {0.3, 10.0}}, {0.01, 30.0});
  EXPECT_NEAR(gs.a_matrix[0][0], 1.0, 1e-4);
  EXPECT_NEAR(gs.a_matrix[0][1], 0.0, 1e-4);
  EXPECT_NEAR(gs.a_matrix[1][0], 0.0, 1e-4);
  EXPECT_NEAR(gs.a_matrix[1][1], 1.0, 1e-4);
}

TEST(FunctionalGramSchmidt, MatchesGramEntryRecursion) {
  const auto family = KernelFamily::heat(1.0);
  const GramContext ctx(family);
  const std::vector<HalfSpacePoint> params = {{0.5, 0.0}, {1.0, 1.0}, {0.3, -1.5}, {2.0, 0.5}, {0.8, 2.5}};
  const DataFunction f([](double x) { return std::exp(-x * x); }, 20.0);
  PoafdState state(ctx, f);
  for (const auto& q : params) state = gram_schmidt_update(state, q);
  const auto gs = functional_gs_oracle(family, params, {0.005, 40.0});
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params.size(); ++j)
      EXPECT_NEAR(state.a_matrix()(i, j), gs.a_matrix[i][j], 1e-5) << i << " " << j;
}

TEST(FunctionalGramSchmidt, RepeatedParameterIsDegenerate) {
  EXPECT_THROW(functional_gs_oracle(KernelFamily::heat(1.0), {{0.5, 0.0}, {0.5, 0.0}}, {0.01, 30.0}),
               DegeneracyError);
}

TEST(ExhaustiveArgmax, SingleKernelAndTieRule) {
  const GramContext ctx(KernelFamily::heat(1.0));
  SearchConfig dense;
  dense.t_range = {0.05, 0.8};
  dense.n_t = 5;
  dense.x_range = {-5.0, 5.0};
  dense.n_x = 41;
  const auto nodes = dense.coarse_nodes();

  const HalfSpacePoint target = nodes[2 * 41 + 13];
  const DataFunction single([&](double x) { return normalized_kernel(ctx, target, x); }, 30.0);
  EXPECT_EQ(exhaustive_argmax_oracle(PoafdState(ctx, single), dense), target);

  const HalfSpacePoint left = nodes[41 + 4], right = nodes[41 + 36];
  ASSERT_EQ(left.x, -right.x);
  const DataFunction pair(
      [&](double x) { return normalized_kernel(ctx, left, x) + normalized_kernel(ctx, right, x); }, 30.0);
  EXPECT_EQ(exhaustive_argmax_oracle(PoafdState(ctx, pair), dense), left);
}

TEST(BoundaryDecayProfile, DecreasesTowardBoundaryAndInfinity) {
  for (const auto& family : {KernelFamily::heat(0.5), KernelFamily::heat(0.8), KernelFamily::poisson(0.7),
                             KernelFamily::poisson(1.0)}) {
    const GramContext ctx(family);
    std::vector<HalfSpacePoint> toward, outward;
    for (int k = 1; k <= 6; ++k) toward.push_back({std::pow(10.0, -k), 0.0});
    for (int x = 2; x <= 64; x += 2) outward.push_back({1.0, static_cast<double>(x)});
    const HalfSpacePoint p{1.0, 0.0};
    const auto a = boundary_decay_profile(ctx, p, toward);
    const auto b = boundary_decay_profile(ctx, p, outward);
    EXPECT_TRUE(strictly_decreasing(a)) << family.name() << " " << family.order();
    EXPECT_TRUE(strictly_decreasing(b)) << family.name() << " " << family.order();
    EXPECT_LE(rel_diff(a[0], std::abs(gram(ctx, p, toward[0])) / std::sqrt(norm_sq(ctx, toward[0]))), 1e-15);
  }
}
