#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fracafd/oracles.hpp"
#include "fracafd/rkhs.hpp"

using namespace fracafd;
namespace quad = fracafd::quadrature;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// C-infinity bump supported on [-1/2, 1/2], unnormalized.
double raw_bump(double x) {
  const double u = 2.0 * x;
  return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

// Cholesky of a symmetric matrix; false if a pivot is not positive.
template <std::size_t N>
bool cholesky_succeeds(std::array<std::array<double, N>, N> m) {
  for (std::size_t j = 0; j < N; ++j) {
    double d = m[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j][k] * m[j][k];
    if (!(d > 0.0)) return false;
    m[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < N; ++i) {
      double v = m[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= m[i][k] * m[j][k];
      m[i][j] = v / m[j][j];
    }
  }
  return true;
}

const std::vector<HalfSpacePoint> kSample = {{0.3, -1.0}, {1.0, 0.5}, {0.05, 0.2}, {2.5, 3.0}, {0.7, -4.0}};

}  // namespace

TEST(Gram, ClassicalExamples) {
  const GramContext cauchy(KernelFamily::heat(0.5));
  EXPECT_NEAR(gram(cauchy, {1.0, 0.0}, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-15);
  EXPECT_NEAR(norm_sq(cauchy, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-15);

  const GramContext poisson(KernelFamily::poisson(1.0));
  EXPECT_NEAR(gram(poisson, {1.0, 0.0}, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-10);
  EXPECT_NEAR(norm_sq(poisson, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-10 / (2.0 * kPi));
  EXPECT_NEAR(gram(poisson, {1.0, 0.0}, {2.0, 1.0}), 3.0 / (10.0 * kPi), 1e-10);
  EXPECT_LE(rel_diff(poisson.poisson_norm_integral(), kPi / 2.0), 1e-10);
}

TEST(Gram, PoissonSpatialAgreesWithFrequencySide) {
  const GramContext ctx(KernelFamily::poisson(0.7));
  const HalfSpacePoint q{1.0, 0.0}, p{0.5, 1.0};
  EXPECT_LE(rel_diff(gram(ctx, q, p), oracles::plancherel_gram_oracle(0.7, q, p)), 1e-6);
}

TEST(Gram, PoissonSigmaOneSemigroup) {
  const GramContext ctx(KernelFamily::poisson(1.0));
  for (const auto& q : kSample)
    for (const auto& p : kSample)
      EXPECT_LE(rel_diff(gram(ctx, q, p), poisson_kernel(1.0, q.t + p.t, q.x - p.x)), 1e-8);
}

TEST(Gram, HeatSemigroupAgainstConvolution) {
  const std::vector<HalfSpacePoint> left = {{0.3, 0.5}, {1.0, 0.5}, {2.0, 0.5}};
  const std::vector<HalfSpacePoint> right = {{0.7, -1.0}, {0.7, 0.0}, {0.7, 2.5}};
  for (double alpha : {0.3, 0.5, 0.8, 1.0}) {
    const GramContext ctx(KernelFamily::heat(alpha));
    for (const auto& q : left)
      for (const auto& p : right)
        EXPECT_LE(rel_diff(gram(ctx, q, p), oracles::convolution_gram_oracle(alpha, q, p, {0.5, 200.0})), 1e-6)
            << alpha;
  }
}

TEST(Gram, SymmetricPositiveDefiniteAndCauchySchwarz) {
  for (const auto& family : {KernelFamily::heat(0.4), KernelFamily::heat(1.0), KernelFamily::poisson(0.7),
                             KernelFamily::poisson(2.0)}) {
    const GramContext ctx(family);
    for (const auto& q : kSample)
      for (const auto& p : kSample) {
        const double a = gram(ctx, q, p), b = gram(ctx, p, q);
        EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
        EXPECT_LE(a * a, norm_sq(ctx, q) * norm_sq(ctx, p) * (1.0 + 1e-10));
      }
    std::array<std::array<double, 4>, 4> m{};
    double trace = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) m[i][j] = gram(ctx, kSample[i], kSample[j]);
      trace += m[i][i];
    }
    // smallest eigenvalue > -1e-9 trace  <=>  m + 1e-9 trace I is positive definite
    for (std::size_t i = 0; i < 4; ++i) m[i][i] += 1e-9 * trace;
    EXPECT_TRUE(cholesky_succeeds(m)) << family.name() << " " << family.order();
  }
}

TEST(Gram, NormOfGeneralOrderHeatKernel) {
  // (1/pi) int_0^inf exp(-2 t r^{1.2}) dr at t = 0.5
  const GramContext ctx(KernelFamily::heat(0.6));
  quad::DecayBound bound{[](double r) { return std::exp(-std::min(r, std::pow(r, 1.2))); },
                         [](double R) { return std::exp(-R); }};
  const double oracle =
      quad::integrate_halfline_decaying([](double r) { return std::exp(-std::pow(r, 1.2)); }, bound, {}) / kPi;
  EXPECT_LE(rel_diff(norm_sq(ctx, {0.5, 3.0}), oracle), 1e-9);
  // closed form: Gamma(1 + 1/1.2) / pi for the same integral
  EXPECT_LE(rel_diff(oracle, std::tgamma(1.0 + 1.0 / 1.2) / kPi), 1e-10);
}

TEST(Gram, PoissonNormScalesInverselyWithT) {
  const GramContext ctx(KernelFamily::poisson(1.5));
  const double c = poisson_normalizer(1.5);
  for (double t : {0.1, 1.0, 7.0}) {
    EXPECT_LE(rel_diff(norm_sq(ctx, {t, 2.0}), c * c * ctx.poisson_norm_integral() / t), 1e-14);
    EXPECT_EQ(gram(ctx, {t, 2.0}, {t, 2.0}), norm_sq(ctx, {t, 2.0}));
  }
}

TEST(Gram, CacheIsSymmetricAndReused) {
  const GramContext ctx(KernelFamily::poisson(0.9));
  const HalfSpacePoint q{0.4, 1.0}, p{1.1, -0.3};
  EXPECT_EQ(GramCache::key(q, p), GramCache::key(p, q));
  const double first = gram(ctx, q, p);
  const std::size_t n = ctx.cache().size();
  EXPECT_GE(n, 1u);
  EXPECT_EQ(gram(ctx, p, q), first);
  EXPECT_EQ(ctx.cache().size(), n);
  EXPECT_FALSE(GramCache::key({1.0, 1e7}, p).has_value());
}

TEST(DataKernelInner, ConcentratedBumpSeesKernelAtCenter) {
  const double mass = quad::integrate_adaptive(raw_bump, -0.5, 0.5, {});
  const DataFunction f([mass](double x) { return raw_bump(x) / mass; }, 1.0);
  const GramContext ctx(KernelFamily::heat(1.0));
  const double expected = 1.0 / std::sqrt(4.0 * kPi * 100.0);
  EXPECT_LE(rel_diff(data_kernel_inner(ctx, f, {100.0, 0.0}), expected), 0.02);
}

TEST(DataKernelInner, ClassicalSemigroups) {
  const DataFunction cauchy_density([](double x) { return poisson_kernel(1.0, 1.0, x); }, 1e6);
  const GramContext poisson(KernelFamily::poisson(1.0));
  EXPECT_NEAR(data_kernel_inner(poisson, cauchy_density, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-9);
  EXPECT_LE(rel_diff(data_kernel_inner(poisson, cauchy_density, {0.5, 2.0}), poisson_kernel(1.0, 1.5, 2.0)), 1e-8);

  const DataFunction heat_half([](double x) { return heat_kernel(0.5, 1.0, x); }, 1e6);
  const GramContext heat(KernelFamily::heat(0.5));
  EXPECT_NEAR(data_kernel_inner(heat, heat_half, {1.0, 0.0}), 1.0 / (2.0 * kPi), 1e-9);
}

TEST(NormalizedObjective, EqualityAndParity) {
  const GramContext ctx(KernelFamily::heat(0.5));
  const DataFunction kernel([](double x) { return heat_kernel(0.5, 1.0, x); }, 1e6);
  EXPECT_NEAR(normalized_objective_k1(ctx, kernel, {1.0, 0.0}), std::sqrt(1.0 / (2.0 * kPi)), 1e-9);

  const DataFunction odd([](double x) { return x * std::exp(-x * x); }, 20.0);
  EXPECT_NEAR(normalized_objective_k1(ctx, odd, {0.7, 0.0}), 0.0, 1e-12);
  const GramContext general(KernelFamily::heat(0.7));
  EXPECT_NEAR(normalized_objective_k1(general, odd, {0.7, 0.0}), 0.0, 1e-12);
}

TEST(DataFunction, NormAndTailDiagnostics) {
  const DataFunction gauss([](double x) { return std::exp(-x * x); }, 20.0);
  EXPECT_LE(rel_diff(gauss.norm_sq(), std::sqrt(kPi / 2.0)), 1e-12);
  EXPECT_LT(gauss.tail_fraction(), 1e-14);

  // 1/(1+|x|): a third of the L^2 mass beyond L lives in (L, 2L]
  const DataFunction slow([](double x) { return 1.0 / (1.0 + std::abs(x)); }, 5.0);
  EXPECT_GT(slow.tail_fraction(), 1e-2);
  EXPECT_THROW(DataFunction([](double) { return 1.0; }, 0.0), DomainError);
}

TEST(GramContext, KernelWidth) {
  EXPECT_DOUBLE_EQ(GramContext(KernelFamily::heat(0.5)).kernel_width(4.0), 4.0);
  EXPECT_DOUBLE_EQ(GramContext(KernelFamily::heat(1.0)).kernel_width(4.0), 2.0);
  EXPECT_DOUBLE_EQ(GramContext(KernelFamily::poisson(3.0)).kernel_width(4.0), 4.0);
  EXPECT_EQ(GramContext(KernelFamily::heat(1.0)).poisson_norm_integral(), 0.0);
}

TEST(GradedBreakpoints, ClippedAndGeometric) {
  auto b = graded_breakpoints(1.0, 0.5, -3.0, 10.0);
  std::sort(b.begin(), b.end());
  EXPECT_EQ(b, (std::vector<double>{-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 9.0}));
  for (double v : b) {
    EXPECT_GE(v, -3.0);
    EXPECT_LE(v, 10.0);
  }
  EXPECT_NE(std::find(b.begin(), b.end(), 1.5), b.end());
  EXPECT_NE(std::find(b.begin(), b.end(), 3.0), b.end());
}
