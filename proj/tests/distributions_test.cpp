#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "condlaw/distributions.hpp"
#include "condlaw/errors.hpp"

using namespace condlaw;

namespace {

const double kInvE = std::exp(-1.0);

// Oracle values below were computed with 50-digit mpmath and frozen.
constexpr double kMu03 = 0.48940222718021493;
constexpr double kBorelMean03 = 1.9584887620591892;
constexpr double kKappa03 = 0.20397280432593599;
constexpr double kAlpha03 = 0.28846110623301219;
constexpr double kBeta03 = 3.0226351869491838;

}  // namespace

TEST(TreeFunction, CriticalPointIsOne) { EXPECT_DOUBLE_EQ(tree_function(kInvE).mu, 1.0); }

TEST(TreeFunction, SmallLambdaGivesSmallMu) {
  const double mu = tree_function(1e-12).mu;
  EXPECT_NEAR(mu, 1e-12, 1e-20);
}

TEST(TreeFunction, MatchesHighPrecisionValueAtPointThree) {
  EXPECT_NEAR(tree_function(0.3).mu, kMu03, 1e-12);
}

TEST(TreeFunction, SolvesTheEquationAndIsMonotone) {
  double previous = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double lambda = kInvE * i / 201.0;
    const double mu = tree_function(lambda).mu;
    EXPECT_LE(std::abs(mu * std::exp(-mu) - lambda), 1e-12);
    EXPECT_GT(mu, previous);
    EXPECT_LE(mu, 1.0);
    previous = mu;
  }
}

TEST(TreeFunction, RejectsOutOfRange) {
  EXPECT_THROW(tree_function(0.0), DomainError);
  EXPECT_THROW(tree_function(-0.1), DomainError);
  EXPECT_THROW(tree_function(0.5), DomainError);
}

TEST(Pmf, BorelAtCriticalLambda) {
  const auto law = IntegerLaw::borel(kInvE);
  EXPECT_NEAR(law.pmf(1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(law.pmf(2), std::exp(-2.0), 1e-15);
  EXPECT_EQ(law.pmf(0), 0.0);
}

TEST(Pmf, PoissonAndGeometric) {
  EXPECT_NEAR(IntegerLaw::poisson(2.0).pmf(0), std::exp(-2.0), 1e-16);
  EXPECT_NEAR(IntegerLaw::poisson(2.0).pmf(3), std::exp(-2.0) * 8.0 / 6.0, 1e-15);
  EXPECT_NEAR(IntegerLaw::geometric(0.25).pmf(2), 0.25 * 0.75 * 0.75, 1e-16);
  EXPECT_EQ(IntegerLaw::poisson(2.0).pmf(-1), 0.0);
}

TEST(Pmf, BorelLogSpaceSurvivesLargeN) {
  const auto law = IntegerLaw::borel(0.36);
  const double p = law.pmf(500);
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_GT(p, 0.0);
  // Ratio of consecutive terms: lambda (1 + 1/n)^{n-1}.
  EXPECT_NEAR(law.pmf(501) / p, 0.36 * std::pow(501.0 / 500.0, 499.0), 1e-10);
}

TEST(Pmf, TruncatedMassSumsToOne) {
  const std::vector<IntegerLaw> laws{IntegerLaw::borel(0.1),   IntegerLaw::borel(0.3),
                                     IntegerLaw::borel(0.35),  IntegerLaw::poisson(0.5),
                                     IntegerLaw::poisson(2.0), IntegerLaw::poisson(30.0),
                                     IntegerLaw::geometric(0.2), IntegerLaw::geometric(0.9)};
  for (const auto& law : laws) {
    const auto top = law.truncation_point(1e-10);
    EXPECT_LT(law.tail_bound(top), 1e-10);
    double total = 0.0;
    for (std::int64_t n = 0; n <= top; ++n) total += law.pmf(n);
    EXPECT_GE(total, 1.0 - 1e-9) << law.describe();
    EXPECT_LE(total, 1.0 + 1e-12) << law.describe();
  }
}

TEST(Pmf, TailBoundDominatesTheExactTail) {
  const auto law = IntegerLaw::borel(0.3);
  for (std::int64_t n = 1; n < 40; ++n) {
    double tail = 0.0;
    for (std::int64_t j = n + 1; j < 400; ++j) tail += law.pmf(j);
    EXPECT_GE(law.tail_bound(n), tail * (1 - 1e-12));
  }
}

TEST(Moments, ClosedFormsMatchTruncatedSeries) {
  for (const auto& law : {IntegerLaw::borel(0.3), IntegerLaw::poisson(2.0), IntegerLaw::geometric(0.4)}) {
    double m = 0.0, m2 = 0.0;
    for (std::int64_t n = 0; n < 2000; ++n) {
      m += n * law.pmf(n);
      m2 += static_cast<double>(n) * n * law.pmf(n);
    }
    EXPECT_NEAR(law.mean(), m, 1e-12) << law.describe();
    EXPECT_NEAR(law.variance(), m2 - m * m, 1e-10) << law.describe();
  }
  EXPECT_NEAR(IntegerLaw::borel(0.3).mean(), kBorelMean03, 1e-12);
}

TEST(Moments, IntegerVarianceInequality) {
  for (const auto& law : {IntegerLaw::borel(0.3), IntegerLaw::poisson(0.05), IntegerLaw::poisson(2.0),
                          IntegerLaw::geometric(0.4),
                          IntegerLaw::finite({{0, 0.5}, {1, 0.5}})}) {
    const double m = law.mean();
    double rho = 0.0;
    for (std::int64_t n = 0; n < 2000; ++n) rho += std::pow(std::abs(n - m), 3) * law.pmf(n);
    EXPECT_LE(law.variance(), 4.0 * rho) << law.describe();
  }
}

TEST(Sampler, BorelMeanAndAtomWithinThreeStandardErrors) {
  const auto law = IntegerLaw::borel(0.3);
  Rng rng(20240601);
  const int draws = 1'000'000;
  double s = 0.0;
  int ones = 0;
  for (int i = 0; i < draws; ++i) {
    const auto d = sample(law, rng);
    ASSERT_FALSE(d.truncated);
    s += static_cast<double>(d.value);
    ones += d.value == 1;
  }
  EXPECT_NEAR(s / draws, kBorelMean03, 3 * std::sqrt(law.variance() / draws));
  const double p1 = law.pmf(1);
  EXPECT_NEAR(static_cast<double>(ones) / draws, p1, 3 * std::sqrt(p1 * (1 - p1) / draws));
}

TEST(Sampler, BorelChiSquareAgainstPmf) {
  const auto law = IntegerLaw::borel(0.3);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    const int draws = 1'000'000;
    std::vector<double> observed(11, 0.0);
    for (int i = 0; i < draws; ++i) {
      const auto v = sample(law, rng).value;
      ++observed[std::min<std::int64_t>(v, 11) - 1];
    }
    double stat = 0.0, rest = 1.0;
    for (int b = 0; b < 11; ++b) {
      const double p = b < 10 ? law.pmf(b + 1) : rest;
      if (b < 10) rest -= p;
      const double expected = p * draws;
      stat += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    const boost::math::chi_squared dist(10);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 1e-4) << "seed " << seed;
  }
}

TEST(Sampler, PoissonAndGeometricMeans) {
  Rng rng(8);
  const int draws = 400000;
  for (const auto& law : {IntegerLaw::poisson(2.0), IntegerLaw::geometric(0.3)}) {
    double s = 0.0;
    for (int i = 0; i < draws; ++i) s += static_cast<double>(sample(law, rng).value);
    EXPECT_NEAR(s / draws, law.mean(), 4 * std::sqrt(law.variance() / draws)) << law.describe();
  }
}

TEST(Sampler, GeometricWithPOneIsDegenerate) {
  Rng rng(1);
  const auto law = IntegerLaw::geometric(1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(law, rng).value, law.support_min());
}

TEST(Sampler, CriticalBorelReportsTruncation) {
  const auto law = IntegerLaw::borel(kInvE);
  Rng rng(17);
  int truncated = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto d = sample(law, rng, 1000);
    EXPECT_LE(d.value, 1000);
    if (d.truncated) {
      ++truncated;
      EXPECT_EQ(d.value, 1000);
    }
  }
  // P(progeny >= 1000) ~ sqrt(2 / (pi * 1000)) ~ 0.025 at criticality.
  EXPECT_GT(truncated, 10);
  EXPECT_THROW(law.truncation_point(), DomainError);
}

TEST(TailBracket, MatchesHighPrecisionValues) {
  const auto b = tail_bracket(0.3);
  EXPECT_NEAR(b.kappa, kKappa03, 1e-12);
  EXPECT_NEAR(b.alpha, kAlpha03, 1e-12);
  EXPECT_NEAR(b.beta, kBeta03, 1e-12);
}

TEST(TailBracket, EndpointsOfTheAdmissibleRange) {
  EXPECT_NEAR(tail_bracket(1.0 / (2.0 * std::numbers::e)).kappa, std::numbers::ln2, 1e-15);
  EXPECT_THROW(tail_bracket(kInvE), DomainError);
  EXPECT_THROW(tail_bracket(0.1), DomainError);
  EXPECT_THROW(TailBracket::from_kappa(0.0), DomainError);
  EXPECT_THROW(TailBracket::from_kappa(0.7), DomainError);
}

TEST(TailBracket, AlphaBelowBetaOnAGrid) {
  const double lo = 1.0 / (2.0 * std::numbers::e);
  for (int i = 0; i < 100; ++i) {
    const double lambda = lo + (kInvE - lo) * i / 100.0;
    const auto b = tail_bracket(lambda);
    EXPECT_LT(b.alpha, b.beta);
    EXPECT_NEAR(b.kappa, -std::log(lambda) - 1.0, 1e-15);
  }
}

TEST(XTailRate, MatchesHighPrecisionCurve) {
  const auto curve = x_tail_rate_check(0.3, 400);
  ASSERT_EQ(curve.size(), 400u);
  const std::vector<std::pair<int, double>> oracle{
      {2, 0.47465588100916680},  {10, 0.44148148888296848},  {20, 0.36669459256773452},
      {50, 0.29393486552319621}, {100, 0.25881308720087296}, {200, 0.23644278350044538},
      {400, 0.22276771491124652}};
  for (const auto& [n, rate] : oracle) {
    EXPECT_EQ(curve[n - 1].n, n);
    EXPECT_NEAR(curve[n - 1].rate, rate, 1e-9 * rate) << "n = " << n;
  }
}

TEST(XTailRate, StartsAtZeroAndDecreasesTowardKappa) {
  const auto curve = x_tail_rate_check(0.3, 400);
  const double kappa = tail_bracket(0.3).kappa;
  EXPECT_EQ(curve[0].rate, 0.0);
  // The curve rises over the first few n, then decreases for good.
  const auto peak = std::max_element(curve.begin(), curve.end(),
                                     [](const auto& a, const auto& b) { return a.rate < b.rate; });
  EXPECT_LE(peak->n, 10);
  for (std::size_t i = static_cast<std::size_t>(peak->n); i < curve.size(); ++i) {
    EXPECT_LT(curve[i].rate, curve[i - 1].rate) << "n = " << curve[i].n;
    EXPECT_GT(curve[i].rate, kappa);
  }
  EXPECT_LT(curve.back().rate, 1.1 * kappa);
}

TEST(XTailRate, RejectsShortCurves) { EXPECT_THROW(x_tail_rate_check(0.3, 9), DomainError); }

TEST(LatticeSpan, DetectsSpanTwo) {
  EXPECT_EQ(lattice_span(IntegerLaw::poisson(2.0)), 1);
  EXPECT_EQ(lattice_span(IntegerLaw::borel(0.3)), 1);
  EXPECT_EQ(lattice_span(IntegerLaw::finite({{0, 0.25}, {2, 0.5}, {4, 0.25}})), 2);
}

TEST(Characteristic, ClosedFormsAgreeWithSums) {
  for (const auto& law : {IntegerLaw::poisson(2.0), IntegerLaw::geometric(0.4), IntegerLaw::borel(0.3)}) {
    for (double s : {0.0, 0.3, 1.7, -2.9}) {
      std::complex<double> acc = 0.0;
      for (std::int64_t n = 0; n < 400; ++n) acc += law.pmf(n) * std::polar(1.0, s * n);
      EXPECT_NEAR(std::abs(law.characteristic(s) - acc), 0.0, 1e-13) << law.describe() << " s=" << s;
    }
  }
}
