#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "hetbelief/errors.hpp"
#include "hetbelief/pricing.hpp"
#include "hetbelief/rng.hpp"
#include "verify/economies.hpp"

using namespace hetbelief;

namespace {

struct Solved {
  verify::TestEconomy eco;
  EconomyCoefficients coeffs;
};

Solved coupled(bool two_agents) {
  auto eco = two_agents ? verify::two_agent_economy() : verify::single_agent_economy();
  auto coeffs = assemble_economy(eco.params, eco.agents);
  return {std::move(eco), std::move(coeffs)};
}

Solved decoupled(double rho = 0.02, double sigma = 0.1) {
  auto eco = verify::decoupled_economy(rho, 1.0, sigma, 1.0);
  auto coeffs = assemble_economy(eco.params, eco.agents);
  return {std::move(eco), std::move(coeffs)};
}

// E0[exp(-G sigma W_tau) (a0 + sigma (x + W_tau))] for Brownian W.
double decoupled_integrand(double tau, double rho, double a0, double sigma, double G, double x) {
  return std::exp(-rho * tau + 0.5 * G * G * sigma * sigma * tau) * (a0 + sigma * x - G * sigma * sigma * tau);
}

}  // namespace

TEST(RiccatiRhs, BoundaryValues) {
  const auto s = coupled(true);
  const auto& c = s.coeffs;
  const int d = c.dim();
  const double G = c.Gamma, J = c.J, sigma = s.eco.params.sigma;
  Eigen::RowVectorXd b0 = Eigen::RowVectorXd::Zero(d);
  const auto r = ode_rhs(Eigen::MatrixXd::Zero(d, d), b0, 0.0, c, s.eco.params);
  const Eigen::MatrixXd da = -(G / J) * c.beta_bar + (G * G / (J * J)) * c.alpha_bar * c.alpha_bar.transpose();
  EXPECT_LT((r.da - da).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r.db - (-(G * G * sigma / J) * c.alpha_bar.transpose())).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(r.dc, 0.5 * G * G * sigma * sigma, 1e-15);
}

TEST(RiccatiRhs, DecoupledConstantB) {
  const auto s = decoupled();
  const double theta = 0.7, sigma = 0.1;
  Eigen::RowVectorXd b0 = Eigen::RowVectorXd::Zero(2);
  b0(0) = theta * sigma;
  auto c = s.coeffs;
  c.B_bar.setZero();
  const auto r = ode_rhs(Eigen::MatrixXd::Zero(2, 2), b0, 0.0, c, s.eco.params);
  EXPECT_TRUE(r.da.isZero());
  EXPECT_TRUE(r.db.isZero());
  EXPECT_NEAR(r.dc, 0.5 * sigma * sigma * (theta - 1.0) * (theta - 1.0), 1e-16);
}

TEST(RiccatiRhs, SymmetrizedQuadraticFormUnchanged) {
  const auto s = coupled(true);
  const int d = s.coeffs.dim();
  PathRng rng(3, 0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
  const auto sym = ode_rhs(a, Eigen::RowVectorXd::Zero(d), 0.0, s.coeffs, s.eco.params).da;
  const auto raw = raw_a_rhs(a, s.coeffs);
  EXPECT_LT((sym - sym.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    const double lhs = z.dot(raw * z), rhs = z.dot(sym * z);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(SolveRiccati, SingleAgentAVanishes) {
  const auto s = coupled(false);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 2.0});
  for (std::size_t k = 0; k < sol.size(); ++k) EXPECT_LT(sol.a(k).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SolveRiccati, ThetaDoesNotMoveA) {
  const auto s = coupled(true);
  const auto r0 = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 1.0, .theta = 0.0});
  const auto r1 = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 1.0, .theta = 0.3});
  EXPECT_EQ(r0.a_data, r1.a_data);
  EXPECT_GT(r0.a_data.cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t k = 0; k < r0.size(); k += 100) {
    EXPECT_LT((r0.a(k) - r0.a(k).transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SolveRiccati, DecoupledClosedForm) {
  const auto s = decoupled(0.02, 0.1);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 3.0});
  const Eigen::VectorXd z = Eigen::Vector2d(0.4, -0.7);
  for (double tau : {0.0, 0.5, 1.25, 3.0}) {
    for (double theta : {0.0, 0.3, -0.5}) {
      const double expected = std::exp(0.5 * 0.01 * (theta - 1.0) * (theta - 1.0) * tau +
                                       theta * (0.1 * 0.4 + 1.0));
      EXPECT_NEAR(eval_VT(sol, tau, z, theta), expected, 1e-12 * expected);
    }
  }
  EXPECT_DOUBLE_EQ(eval_VT(sol, 0.0, z, 0.0), 1.0);
}

TEST(SolveRiccati, OutOfRangeTau) {
  const auto s = coupled(false);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 0.5});
  EXPECT_THROW(eval_VT(sol, 0.6, Eigen::Vector2d::Zero(), 0.0), ValidationError);
  EXPECT_THROW(eval_VT(sol, 0.2, Eigen::Vector3d::Zero(), 0.0), ValidationError);
}

TEST(SolveRiccati, BlowupReported) {
  const auto s = coupled(true);
  try {
    solve_riccati(s.coeffs, s.eco.params, {.tau_max = 5.0, .blowup_bound = 1e-3});
    FAIL() << "expected a blowup";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("blowup"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("tau*"), std::string::npos);
  }
}

TEST(SolveRiccati, SensitivityMatchesFiniteDifference) {
  const auto s = coupled(true);
  const Eigen::VectorXd z = Eigen::Vector3d(0.3, -0.2, 0.1);
  const double h = 1e-5;
  RiccatiOptions o{.tau_max = 1.0};
  const auto base = solve_riccati(s.coeffs, s.eco.params, o);
  o.theta = 0.2 + h;
  const auto up = solve_riccati(s.coeffs, s.eco.params, o);
  o.theta = 0.2 - h;
  const auto down = solve_riccati(s.coeffs, s.eco.params, o);
  const double fd = (eval_VT(up, 0.7, z, 0.2 + h) - eval_VT(down, 0.7, z, 0.2 - h)) / (2 * h);
  EXPECT_NEAR(eval_dVT_dtheta(base, 0.7, z, 0.2), fd, 1e-7 * std::abs(fd));
  // Moving theta through the sensitivities is exact.
  o.theta = 0.2;
  const auto direct = solve_riccati(s.coeffs, s.eco.params, o);
  EXPECT_NEAR(eval_VT(base, 0.7, z, 0.2), eval_VT(direct, 0.7, z, 0.2), 1e-12);
}

TEST(McOracle, DecoupledMgf) {
  const auto s = decoupled(0.02, 0.3);
  const auto est = mc_oracle_VT(s.coeffs, s.eco.params, 1.0, Eigen::Vector2d(0.2, 0.0), 0.0,
                                {.n_paths = 20000, .seed = 4, .dt = 1e-2});
  EXPECT_LT(std::abs(est.mean - std::exp(0.5 * 0.09)), 3.0 * est.std_error);
}

TEST(McOracle, ZeroHorizonIsDeterministic) {
  const auto s = coupled(false);
  const auto grid = mc_oracle_VT_grid(s.coeffs, s.eco.params, {0.0}, Eigen::Vector2d(0.5, 0.1),
                                      {0.0, 0.3}, {.n_paths = 1000, .seed = 1, .dt = 1e-2});
  EXPECT_DOUBLE_EQ(grid[0][0].mean, 1.0);
  EXPECT_NEAR(grid[0][1].mean, std::exp(0.3 * (0.2 * 0.5 + 1.0)), 1e-14);
  EXPECT_LT(grid[0][1].std_error, 1e-14);
}

TEST(McOracle, AgreesWithRiccatiShortHorizon) {
  const auto s = coupled(true);
  const Eigen::VectorXd z = Eigen::Vector3d(0.3, -0.2, 0.1);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 0.5});
  const auto est = mc_oracle_VT(s.coeffs, s.eco.params, 0.5, z, 0.3, {.n_paths = 20000, .seed = 6, .dt = 1e-3});
  EXPECT_LT(std::abs(est.mean - eval_VT(sol, 0.5, z, 0.3)), 3.0 * est.std_error);
}

TEST(StockPrice, DecoupledClosedForm) {
  const auto s = decoupled(0.02, 0.1);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 500.0, .dtau = 1e-2});
  const auto q = stock_price(sol, Eigen::Vector2d(0.0, 0.0), s.eco.params);
  const double rp = 0.015;
  const double exact = 1.0 / rp - 0.01 / (rp * rp);
  EXPECT_NEAR(exact, 22.2222222, 1e-6);
  EXPECT_NEAR(q.S, exact, 1e-3 * exact);
  EXPECT_LE(std::abs(q.S - exact), q.error_estimate + 1e-6);
  EXPECT_DOUBLE_EQ(q.T_max, 500.0);
}

TEST(StockPrice, AgreesWithAdaptiveQuadrature) {
  const double rho = 0.2, sigma = 0.3, x = 0.5;
  const auto s = decoupled(rho, sigma);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 100.0, .dtau = 1e-2});
  const auto q = stock_price(sol, Eigen::Vector2d(x, 0.0), s.eco.params, {.T_max = 100.0});
  boost::math::quadrature::exp_sinh<double> integrator;
  const double ref = integrator.integrate(
      [&](double t) { return decoupled_integrand(t, rho, 1.0, sigma, 1.0, x); });
  EXPECT_NEAR(q.S, ref, 1e-7 * std::abs(ref));
}

TEST(StockPrice, LinearInA0) {
  auto s = decoupled(0.2, 0.3);
  const auto sol1 = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 100.0, .dtau = 1e-2});
  const double S1 = stock_price(sol1, Eigen::Vector2d::Zero(), s.eco.params, {.T_max = 100.0}).S;
  s.eco.params.a0 = 2.0;
  const auto sol2 = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 100.0, .dtau = 1e-2});
  const double S2 = stock_price(sol2, Eigen::Vector2d::Zero(), s.eco.params, {.T_max = 100.0}).S;
  EXPECT_NEAR(S2 - S1, 1.0 / (0.2 - 0.045), 1e-6);
}

TEST(StockPrice, NonDecayingIntegrand) {
  const auto s = decoupled(0.01, 0.2);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 20.0});
  try {
    stock_price(sol, Eigen::Vector2d::Zero(), s.eco.params, {.T_max = 20.0});
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("integrand non-decaying"), std::string::npos);
  }
}

TEST(StockPrice, NeedsLongEnoughSolution) {
  const auto s = coupled(false);
  const auto sol = solve_riccati(s.coeffs, s.eco.params, {.tau_max = 1.0});
  EXPECT_THROW(stock_price(sol, Eigen::Vector2d::Zero(), s.eco.params, {.T_max = 5.0}), ValidationError);
}

TEST(McPrice, RejectsGridMismatch) {
  const auto s = coupled(false);
  EXPECT_THROW(mc_price_oracle(s.coeffs, s.eco.params, Eigen::Vector2d::Zero(), 1.0,
                               {.n_paths = 100, .seed = 1, .dt = 0.3}),
               ValidationError);
}
