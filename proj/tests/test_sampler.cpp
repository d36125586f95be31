#include <cmath>

#include <gtest/gtest.h>

#include "langinc/gibbs.hpp"
#include "langinc/metrics.hpp"
#include "langinc/sampler.hpp"

using namespace langinc;

namespace {

ChainConfig<double> base_config() {
  ChainConfig<double> cfg;
  cfg.epsilon = 0.01;
  cfg.sigma = 1.0;
  cfg.n_steps = 10;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST(UlaStep, IdentityWhenDriftAndNoiseVanish) {
  const auto flat = constant_potential(3.0);
  auto cfg = base_config();
  Rng rng(1);
  EXPECT_EQ(ula_step(flat, 0.75, cfg, 0.0, rng), 0.75);
}

TEST(UlaStep, ExamplePotentialSubstitution) {
  const auto f = example_potential();
  auto cfg = base_config();
  Rng rng(1);
  EXPECT_NEAR(ula_step(f, 0.5, cfg, 0.0, rng), 0.51, 1e-15);
}

TEST(UlaStep, MinNormAtKink) {
  const auto f = example_potential();
  auto cfg = base_config();
  cfg.selection = SelectionRule::MinNorm;
  Rng rng(1);
  EXPECT_EQ(ula_step(f, 0.0, cfg, 0.0, rng), 0.0);
}

TEST(UlaStep, NoiseScaleIsSqrtTwoSigmaEps) {
  const auto flat = constant_potential();
  auto cfg = base_config();
  cfg.epsilon = 0.02;
  cfg.sigma = 2.0;
  Rng rng(1);
  EXPECT_NEAR(ula_step(flat, 0.0, cfg, 1.0, rng), std::sqrt(2.0 * 2.0 * 0.02), 1e-15);
}

TEST(RunUla, CountContract) {
  const auto f = example_potential();
  auto cfg = base_config();
  auto chain = run_ula(f, cfg);
  EXPECT_EQ(chain.samples.size(), 10u);
  EXPECT_EQ(chain.accepted, 10u);
  EXPECT_EQ(chain.acceptance_rate(), 1.0);
}

TEST(RunUla, LengthArithmetic) {
  const auto f = example_potential();
  for (std::uint64_t n : {1u, 2u, 7u, 50u, 101u}) {
    for (std::uint64_t burn : {0u, 1u, 5u}) {
      for (std::uint64_t thin : {1u, 2u, 3u, 10u}) {
        if (burn + 1 > n) continue;
        auto cfg = base_config();
        cfg.n_steps = n;
        cfg.burn_in = burn;
        cfg.thin = thin;
        auto chain = run_ula(f, cfg);
        EXPECT_EQ(chain.samples.size(), (n - burn) / thin);
        EXPECT_EQ(chain.accepted, n);
        if (!chain.samples.empty()) {
          EXPECT_LE(chain.step_of(chain.samples.size() - 1), n);
        }
      }
    }
  }
}

TEST(RunUla, Deterministic) {
  const auto f = example_potential();
  auto cfg = base_config();
  cfg.n_steps = 5000;
  cfg.selection = SelectionRule::RandomConvex;
  const auto a = run_ula(f, cfg);
  const auto b = run_ula(f, cfg);
  EXPECT_EQ(a.samples, b.samples);
  cfg.seed = 43;
  const auto c = run_ula(f, cfg);
  EXPECT_NE(a.samples, c.samples);
}

TEST(RunUla, ConfigValidation) {
  const auto f = example_potential();
  auto cfg = base_config();
  cfg.epsilon = 0.0;
  EXPECT_THROW(run_ula(f, cfg), ContractViolation);
  cfg = base_config();
  cfg.burn_in = 10;
  EXPECT_THROW(run_ula(f, cfg), ContractViolation);
  cfg = base_config();
  cfg.thin = 0;
  EXPECT_THROW(run_ula(f, cfg), ContractViolation);
  cfg = base_config();
  cfg.sigma = -1.0;
  EXPECT_THROW(run_rwm(f, cfg), ContractViolation);
}

TEST(RunUla, DivergenceReportsStep) {
  // f = -x^2 pushes the chain outwards geometrically.
  const PiecewisePotential1D repulsive(Cubic{0.0, 0.0, -1.0, 0.0});
  auto cfg = base_config();
  cfg.epsilon = 0.5;
  cfg.n_steps = 1000;
  cfg.init = 1.0;
  try {
    run_ula(repulsive, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergedError& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_LT(e.step(), 1000u);
  }
}

TEST(RunUla, BimodalAtSmallStep) {
  const auto f = example_potential();
  auto cfg = base_config();
  cfg.epsilon = 0.001;
  cfg.n_steps = 2'000'000;
  cfg.burn_in = 10'000;
  cfg.seed = 7;
  const auto chain = run_ula(f, cfg);
  const auto h = histogram(chain.samples, uniform_edges(-4.0, 4.0, 80));
  EXPECT_NEAR(histogram_mode(h, -4.0, 0.0), -1.0, 0.1);
  EXPECT_NEAR(histogram_mode(h, 0.0, 4.0), 1.0, 0.1);
}

TEST(Metropolis, AcceptanceProbability) {
  EXPECT_EQ(metropolis_accept_prob(1.0, 1.0, 1.0), 1.0);
  EXPECT_EQ(metropolis_accept_prob(1.0, 0.5, 1.0), 1.0);
  EXPECT_NEAR(metropolis_accept_prob(0.0, 1.0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(metropolis_accept_prob(0.0, 1.0, 2.0), std::exp(-0.5), 1e-15);
}

TEST(Metropolis, ConstantPotentialAlwaysAccepts) {
  auto cfg = base_config();
  cfg.n_steps = 2000;
  cfg.proposal_std = 3.0;
  const auto chain = run_rwm(constant_potential(2.0), cfg);
  EXPECT_EQ(chain.accepted, 2000u);
  EXPECT_EQ(chain.acceptance_rate(), 1.0);
}

TEST(Metropolis, InvariantToConstantShift) {
  const auto f = example_potential();
  const auto g = f.plus_constant(17.0);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = -3 + 6 * rng.uniform();
    const double y = -3 + 6 * rng.uniform();
    const double a1 = metropolis_accept_prob(f(x), f(y), 1.0);
    const double a2 = metropolis_accept_prob(g(x), g(y), 1.0);
    EXPECT_NEAR(a1, a2, 1e-12);
    EXPECT_GE(a1, 0.0);
    EXPECT_LE(a1, 1.0);
    const double gx = f.piece_derivative(x), gy = f.piece_derivative(y);
    const double m1 = mala_accept_prob(f(x), f(y), x, y, gx, gy, 0.01, 1.0);
    const double m2 = mala_accept_prob(g(x), g(y), x, y, gx, gy, 0.01, 1.0);
    EXPECT_NEAR(m1, m2, 1e-12);
    EXPECT_GE(m1, 0.0);
    EXPECT_LE(m1, 1.0);
  }
}

TEST(Metropolis, RwmMatchesGibbs) {
  const auto f = example_potential();
  const GibbsDensity g(f, 1.0);
  auto cfg = base_config();
  cfg.n_steps = 100'000;
  cfg.proposal_std = 1.0;
  cfg.seed = 11;
  const auto chain = run_rwm(f, cfg);
  EXPECT_GT(chain.acceptance_rate(), 0.2);
  EXPECT_LT(chain.acceptance_rate(), 1.0);
  EXPECT_LE(w1_to_gibbs(chain.samples, g), 0.05);
}

TEST(Mala, SymmetricMoveAcceptedWithCertainty) {
  EXPECT_EQ(mala_accept_prob(0.3, 0.3, 1.5, 1.5, 0.0, 0.0, 0.01, 1.0), 1.0);
}

TEST(Mala, HighAcceptanceForSmallStepOnQuadratic) {
  auto cfg = base_config();
  cfg.epsilon = 1e-3;
  cfg.n_steps = 10'000;
  const auto chain = run_mala(quadratic_potential(0.5), cfg);
  EXPECT_GE(chain.acceptance_rate(), 0.9);
}

TEST(Mala, StationaryLawMatchesGibbs) {
  const auto f = example_potential();
  const GibbsDensity g(f, 1.0);
  auto cfg = base_config();
  // Large step: mixing between the wells, not bias, limits W1 here.
  cfg.epsilon = 0.5;
  cfg.n_steps = 101'000;
  cfg.burn_in = 1'000;
  cfg.seed = 5;
  const auto chain = run_mala(f, cfg);
  ASSERT_EQ(chain.samples.size(), 100'000u);
  EXPECT_LE(w1_to_gibbs(chain.samples, g), 0.05);
}

TEST(Selection, LeftAndRightLimitChainsAgree) {
  // Same seed: the two chains only differ if an iterate lands exactly on a breakpoint.
  const auto f = example_potential();
  auto cfg = base_config();
  cfg.epsilon = 0.001;
  cfg.n_steps = 100'000;
  cfg.selection = SelectionRule::LeftLimit;
  const auto left = run_ula(f, cfg);
  cfg.selection = SelectionRule::RightLimit;
  const auto right = run_ula(f, cfg);
  cfg.seed = 4242;
  const auto other = run_ula(f, cfg);
  const double diff = w1_samples(left.samples, right.samples);
  const double floor = w1_samples(right.samples, other.samples);
  EXPECT_LE(diff, 2.0 * floor);
}

TEST(Sampler, VectorStateUla) {
  const auto data = synthetic_regression(30, 5, 2);
  ReLUNetPotential net(ReLUNetPotential::three_hidden_layers(5), data, 1.0);
  Rng rng(1);
  ChainConfig<std::vector<double>> cfg;
  cfg.epsilon = 1e-4;
  cfg.n_steps = 20;
  cfg.thin = 5;
  cfg.init = net.initial_parameters(rng);
  const auto chain = run_ula(net, cfg);
  ASSERT_EQ(chain.samples.size(), 4u);
  EXPECT_EQ(chain.samples[0].size(), net.dimension());
  const auto again = run_ula(net, cfg);
  EXPECT_EQ(chain.samples, again.samples);
  const auto rwm = run_rwm(net, cfg);
  EXPECT_EQ(rwm.samples.size(), 4u);
  const auto mala = run_mala(net, cfg);
  EXPECT_EQ(mala.samples.size(), 4u);
}

TEST(Sampler, PerChainStreams) {
  Rng a = Rng::for_chain(10, 0);
  Rng b = Rng::for_chain(10, 1);
  Rng c = Rng::for_chain(10, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_EQ(x, c());
}
