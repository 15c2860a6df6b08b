#include <cmath>

#include <gtest/gtest.h>

#include "hetbelief/economy.hpp"
#include "hetbelief/errors.hpp"
#include "hetbelief/filtering.hpp"
#include "hetbelief/rng.hpp"
#include "verify/economies.hpp"

using namespace hetbelief;

namespace {

verify::TestEconomy unit_signal_economy(double gamma) {
  verify::TestEconomy eco;
  eco.params = {.n = 2, .J = 1, .rho = 0.05, .a0 = 1.0, .sigma = 0.1};
  Eigen::MatrixXd B(2, 2);
  B << 1, 1, 0, 1;
  eco.agents.push_back(AgentBelief::from_matrix(B, gamma));
  attach_stationary_covariances(eco.agents);
  return eco;
}

}  // namespace

TEST(Assemble, AlphaBetaForUnitSignal) {
  const auto eco = unit_signal_economy(1.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  EXPECT_EQ(c.dim(), 2);
  EXPECT_EQ(c.Gamma, 1.0);
  EXPECT_EQ(c.alpha_bar, Eigen::Vector2d(-1, -1));
  EXPECT_EQ(c.beta_bar, Eigen::MatrixXd::Ones(2, 2));
}

TEST(Assemble, HarmonicRiskAversion) {
  auto eco = verify::two_agent_economy();
  eco.agents[0].gamma = 2.0;
  eco.agents[1].gamma = 2.0;
  EXPECT_DOUBLE_EQ(assemble_economy(eco.params, eco.agents).Gamma, 1.0);
  const auto orig = verify::two_agent_economy();
  EXPECT_DOUBLE_EQ(assemble_economy(orig.params, orig.agents).Gamma, 2.0 / 3.0);
}

TEST(Assemble, Shapes) {
  const auto eco = verify::two_agent_economy();
  const auto c = assemble_economy(eco.params, eco.agents);
  EXPECT_EQ(c.B_bar.rows(), 3);
  EXPECT_EQ(c.Q_bar.size(), 3);
  EXPECT_EQ(c.Q_bar(0), 1.0);
  EXPECT_TRUE(c.B_bar.row(0).isZero());
  EXPECT_EQ(c.B1(0, 1), 0.0);
  EXPECT_EQ(c.B1(1, 0), 0.0);
  auto bad = eco.params;
  bad.J = 3;
  EXPECT_THROW(assemble_economy(bad, eco.agents), ValidationError);
}

TEST(StackedStep, IdenticalAgentsMoveTogether) {
  auto one = verify::single_agent_economy();
  MarketParams p = one.params;
  p.J = 3;
  std::vector<AgentBelief> agents(3, one.agents[0]);
  const auto c = assemble_economy(p, agents);
  StackedState z{Eigen::Vector4d(0.2, 0.1, 0.1, 0.1)};
  PathRng rng(1, 0);
  for (int k = 0; k < 500; ++k) z = stacked_step(z, 0.03 * rng.normal(), 1e-3, c);
  EXPECT_EQ(z.z(1), z.z(2));
  EXPECT_EQ(z.z(2), z.z(3));
}

TEST(StackedStep, ZeroDynamics) {
  EconomyCoefficients c;
  c.n = 2;
  c.J = 1;
  c.B_bar = Eigen::MatrixXd::Zero(2, 2);
  c.Q_bar = Eigen::Vector2d(1, 0);
  const StackedState z{Eigen::Vector2d(0.4, -1.2)};
  EXPECT_EQ(stacked_step(z, 0.0, 0.01, c).z, z.z);
}

TEST(StackedStep, WorkedExample) {
  const auto eco = unit_signal_economy(1.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  const auto next = stacked_step({Eigen::Vector2d(1, 0)}, 0.02, 0.01, c);
  const double v = std::sqrt(2.0) - 1.0;
  EXPECT_DOUBLE_EQ(next.z(0), 1.02);
  EXPECT_NEAR(next.z(1), -v * 0.01 - v * 0.02, 1e-15);
  EXPECT_NEAR(next.z(1), -0.01242640687, 1e-11);
}

TEST(Rates, ZeroStateLimit) {
  const auto eco = unit_signal_economy(1.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  const StackedState zero{Eigen::Vector2d::Zero()};
  EXPECT_DOUBLE_EQ(riskless_rate(zero, c, eco.params), 0.05 - 0.005);
  EXPECT_DOUBLE_EQ(market_price_of_risk(zero, c, eco.params), 0.1);
  EXPECT_DOUBLE_EQ(log_spd_increment(zero, 0.02, 0.01, c, eco.params), -0.05 * 0.01 - 0.1 * 0.02);
}

TEST(Rates, WorkedQuadraticForm) {
  const auto eco = unit_signal_economy(1.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  const StackedState z{Eigen::Vector2d(1, 1)};
  EXPECT_NEAR(riskless_rate(z, c, eco.params), 0.05 - 0.205, 1e-14);
  EXPECT_NEAR(market_price_of_risk(z, c, eco.params), 0.1 + 2.0, 1e-14);
}

TEST(Rates, RhoShiftsOneForOne) {
  auto eco = verify::two_agent_economy();
  const auto c = assemble_economy(eco.params, eco.agents);
  const StackedState z{Eigen::Vector3d(0.3, -0.4, 0.2)};
  const double r0 = riskless_rate(z, c, eco.params);
  eco.params.rho += 0.125;
  EXPECT_NEAR(riskless_rate(z, c, eco.params), r0 + 0.125, 1e-14);
}

TEST(Rates, DecoupledLimit) {
  const auto eco = verify::decoupled_economy(0.02, 1.0, 0.1, 1.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  EXPECT_TRUE(c.alpha_bar.isZero());
  EXPECT_TRUE(c.beta_bar.isZero());
  const StackedState z{Eigen::Vector2d(3.0, -2.0)};
  EXPECT_DOUBLE_EQ(market_price_of_risk(z, c, eco.params), 0.1);
  EXPECT_DOUBLE_EQ(log_spd_increment(z, 0.05, 0.01, c, eco.params), -0.02 * 0.01 - 0.1 * 0.05);
}

// d zeta / zeta + r dt + kappa dx should have zero mean along simulated paths.
TEST(Rates, ItoConsistency) {
  const auto eco = unit_signal_economy(2.0);
  const auto c = assemble_economy(eco.params, eco.agents);
  const double dt = 1e-3;
  const int paths = 2000, steps_per_path = 100, steps = paths * steps_per_path;
  double sum = 0.0, sum_sq = 0.0, rms = 0.0;
  for (int p = 0; p < paths; ++p) {
    PathRng rng(77, static_cast<std::uint64_t>(p));
    StackedState z{Eigen::Vector2d(0.1, 0.05)};
    for (int k = 0; k < steps_per_path; ++k) {
      const double dx = std::sqrt(dt) * rng.normal();
      const double ratio = std::expm1(log_spd_increment(z, dx, dt, c, eco.params));
      const double resid = ratio + riskless_rate(z, c, eco.params) * dt +
                           market_price_of_risk(z, c, eco.params) * dx;
      sum += resid / dt;
      sum_sq += (resid / dt) * (resid / dt);
      rms += resid * resid;
      z = stacked_step(z, dx, dt, c);
    }
  }
  const double mean = sum / steps;
  const double se = std::sqrt((sum_sq / steps - mean * mean) / steps);
  EXPECT_LT(std::abs(mean), 3.0 * se) << "mean " << mean << " se " << se;
  EXPECT_LT(std::sqrt(rms / steps), 2.0 * dt);
}
