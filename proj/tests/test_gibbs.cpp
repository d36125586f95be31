#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "langinc/gibbs.hpp"
#include "langinc/metrics.hpp"
#include "oracles.hpp"

using namespace langinc;

TEST(Gibbs, ExampleNormalizerClosedForm) {
  const GibbsDensity g(example_potential(), 1.0);
  EXPECT_NEAR(g.normalizer(), oracle::example_z(), 1e-9 * oracle::example_z());
  EXPECT_LE(g.tail_mass(), 1e-10);
}

TEST(Gibbs, ExampleNormalizerAgainstQuadratureOracle) {
  const auto f = example_potential();
  for (double sigma : {0.25, 0.5, 2.0}) {
    const double z = oracle::integrate_split([&](double x) { return std::exp(-f(x) / sigma); }, {-1.0, 0.0, 1.0});
    const GibbsDensity g(f, sigma);
    EXPECT_NEAR(g.normalizer(), z, 1e-9 * z) << sigma;
  }
}

TEST(Gibbs, QuadraticNormalizer) {
  const PiecewisePotential1D sq(Cubic{0.0, 0.0, 1.0, 0.0});
  EXPECT_NEAR(GibbsDensity(sq, 1.0).normalizer(), std::sqrt(std::numbers::pi), 1e-9);
}

TEST(Gibbs, AbsoluteValueScalesWithSigma) {
  const auto f = abs_potential();
  for (double sigma : {0.1, 0.5, 1.0, 3.0}) {
    EXPECT_NEAR(GibbsDensity(f, 2 * sigma).normalizer(), 2 * GibbsDensity(f, sigma).normalizer(), 1e-9 * sigma);
    EXPECT_NEAR(GibbsDensity(f, sigma).normalizer(), 2 * sigma, 1e-9 * sigma);
  }
}

TEST(Gibbs, ExplicitDomainNormalizer) {
  const auto f = example_potential();
  EXPECT_NEAR(normalizer(f, 1.0, Interval{-40.0, 40.0}), oracle::example_z(), 1e-9);
  EXPECT_THROW(normalizer(f, 1.0, Interval{-0.5, 40.0}), ContractViolation);
  EXPECT_THROW(GibbsDensity(f, 1.0, Interval{-3.0, 3.0}), ContractViolation);
}

TEST(Gibbs, PdfValues) {
  const GibbsDensity g(example_potential(), 1.0);
  const double z = oracle::example_z();
  EXPECT_NEAR(g.pdf(1.0), 1.0 / z, 1e-12);
  EXPECT_NEAR(g.pdf(-1.0), 1.0 / z, 1e-12);
  EXPECT_NEAR(g.pdf(0.0), std::exp(-1.0) / z, 1e-12);
}

TEST(Gibbs, CdfAndQuantileRoundTrip) {
  const GibbsDensity g(example_potential(), 1.0);
  EXPECT_NEAR(g.quantile(0.5), 0.0, 1e-10);
  EXPECT_NEAR(g.cdf(0.0), 0.5, 1e-12);
  for (double u = 0.001; u < 1.0; u += 0.0137) {
    EXPECT_NEAR(g.cdf(g.quantile(u)), u, 1e-10) << u;
  }
  EXPECT_THROW(g.quantile(0.0), DomainError);
  EXPECT_THROW(g.quantile(1.0), DomainError);
  EXPECT_THROW(g.quantile(-0.1), DomainError);
}

TEST(Gibbs, CdfMatchesOracleIntegral) {
  const auto f = example_potential();
  const GibbsDensity g(f, 1.0);
  const double z = oracle::example_z();
  auto w = [&](double x) { return std::exp(-f(x)); };
  // Left of -1 the weight is exp(1 + x), whose integral is 1.
  EXPECT_NEAR(g.cdf(-1.0), 1.0 / z, 1e-10);
  for (double x : {-2.5, -0.7, -0.2, 0.3, 0.9, 1.8}) {
    double mass = oracle::integrate(w, -60.0, std::min(x, -1.0));
    if (x > -1.0) mass += oracle::integrate(w, -1.0, std::min(x, 0.0));
    if (x > 0.0) mass += oracle::integrate(w, 0.0, std::min(x, 1.0));
    if (x > 1.0) mass += oracle::integrate(w, 1.0, x);
    EXPECT_NEAR(g.cdf(x), mass / z, 1e-10) << x;
  }
}

TEST(GibbsProperty, PdfIntegratesToOne) {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = oracle::random_potential(rng);
    if (!f.is_confined()) continue;
    const GibbsDensity g(f, 0.5 + rng.uniform());
    const auto d = g.domain();
    std::vector<double> knots(f.breakpoints().begin(), f.breakpoints().end());
    double mass = 0.0;
    double a = d.lo;
    knots.push_back(d.hi);
    for (double b : knots) {
      mass += oracle::integrate([&](double x) { return g.pdf(x); }, a, b);
      a = b;
    }
    EXPECT_NEAR(mass, 1.0, 1e-8) << trial;
  }
}

TEST(GibbsProperty, InvariantToConstantShift) {
  const auto f = example_potential();
  const GibbsDensity g(f, 0.7);
  const GibbsDensity h(f.plus_constant(25.0), 0.7);
  for (double x = -4.0; x <= 4.0; x += 0.31) {
    EXPECT_NEAR(g.pdf(x), h.pdf(x), 1e-12);
    EXPECT_NEAR(g.cdf(x), h.cdf(x), 1e-12);
  }
  EXPECT_NEAR(h.log_normalizer(), g.log_normalizer() - 25.0 / 0.7, 1e-10);
}

TEST(Gibbs, RejectsNonConfiningPotential) {
  EXPECT_THROW(GibbsDensity(constant_potential(), 1.0), ContractViolation);
  EXPECT_THROW(GibbsDensity(PiecewisePotential1D(Cubic{0, 1, 0, 0}), 1.0), ContractViolation);
  EXPECT_THROW(GibbsDensity(example_potential(), 0.0), ContractViolation);
}

TEST(Gibbs, SampleMeanNearZero) {
  const GibbsDensity g(example_potential(), 1.0);
  const auto xs = iid_sample(g, 1'000'000, 42);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  EXPECT_NEAR(mean, 0.0, 0.005);
}

TEST(Gibbs, TwoSeedsAgreeInW1) {
  const GibbsDensity g(example_potential(), 1.0);
  const auto a = iid_sample(g, 200'000, 1);
  const auto b = iid_sample(g, 200'000, 2);
  EXPECT_LE(w1_samples(a, b), 0.01);
  EXPECT_LE(w1_to_gibbs(a, g), 0.01);
}

TEST(Gibbs, SamplingDeterministicAndChecked) {
  const GibbsDensity g(example_potential(), 1.0);
  EXPECT_EQ(iid_sample(g, 100, 5), iid_sample(g, 100, 5));
  EXPECT_THROW(iid_sample(g, 0, 5), ContractViolation);
  const auto xs = inverse_cdf_transform(g, {0.5, 0.25});
  EXPECT_NEAR(xs[0], 0.0, 1e-10);
  EXPECT_LT(xs[1], 0.0);
}

TEST(Gibbs, QuantilesMatchNormalOracle) {
  const GibbsDensity g(quadratic_potential(0.5), 1.0);
  for (double u : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(g.quantile(u), oracle::normal_quantile(u), 1e-9) << u;
  }
}
