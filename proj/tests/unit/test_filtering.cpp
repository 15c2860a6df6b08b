#include <cmath>

#include <gtest/gtest.h>

#include "hetbelief/errors.hpp"
#include "hetbelief/filtering.hpp"

using namespace hetbelief;

namespace {

Eigen::MatrixXd scalar_B() {
  Eigen::MatrixXd B(2, 2);
  B << 1, 1, 0, 1;
  return B;
}

// v' = 1 - 2v - v^2, v(0) = 0, solved by separation of variables.
double riccati_closed_form(double t) {
  const double r1 = std::sqrt(2.0) - 1.0, r2 = -1.0 - std::sqrt(2.0);
  const double k = 2.0 * std::sqrt(2.0), K = r1 / r2;
  const double e = K * std::exp(-k * t);
  return (r1 - r2 * e) / (1.0 - e);
}

}  // namespace

TEST(CovRhs, AtZero) {
  Eigen::MatrixXd B(3, 3);
  B << 1, 0.3, 0.2, 0.1, 2, 0, 0.4, 0.5, 3;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(3, 3);
  expected(0, 0) = 0.0;
  EXPECT_TRUE(cov_rhs(Eigen::MatrixXd::Zero(3, 3), B).isApprox(expected, 1e-15));
}

TEST(CovRhs, ScalarRoot) {
  const double v = 0.3;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2, 2);
  V(1, 1) = v;
  EXPECT_NEAR(cov_rhs(V, scalar_B())(1, 1), -(2 * v - 1 + v * v), 1e-15);
  V(1, 1) = std::sqrt(2.0) - 1.0;
  EXPECT_NEAR(cov_rhs(V, scalar_B())(1, 1), 0.0, 1e-15);
}

TEST(CovRhs, ZeroAtStationary) {
  Eigen::MatrixXd B(3, 3);
  B << 0.7, 0.5, 0.3, 0.2, 1.0, 0.2, -0.1, 0.0, 1.5;
  const auto Vt = stationary_covariance(decompose_belief(B));
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
  V.block(1, 1, 2, 2) = Vt;
  EXPECT_LT(cov_rhs(V, B).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(IntegrateCovariance, EmptyHorizon) {
  const auto path = integrate_covariance({0.0, Eigen::MatrixXd::Zero(2, 2)}, scalar_B(), 0.0);
  ASSERT_EQ(path.size(), 1u);
  EXPECT_TRUE(path[0].V.isZero());
}

TEST(IntegrateCovariance, MatchesClosedForm) {
  const auto path = integrate_covariance({0.0, Eigen::MatrixXd::Zero(2, 2)}, scalar_B(), 5.0, 1e-3);
  double prev = -1.0;
  for (const auto& s : path) {
    EXPECT_NEAR(s.V(1, 1), riccati_closed_form(s.t), 1e-10) << "t = " << s.t;
    EXPECT_GE(s.V(1, 1), prev);
    prev = s.V(1, 1);
  }
  EXPECT_NEAR(path.back().V(1, 1), std::sqrt(2.0) - 1.0, 1e-5);
}

TEST(IntegrateCovariance, FixedPoint) {
  Eigen::MatrixXd B(3, 3);
  B << 0.7, 0.5, 0.3, 0.2, 1.0, 0.2, -0.1, 0.0, 1.5;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
  V.block(1, 1, 2, 2) = stationary_covariance(decompose_belief(B));
  const auto path = integrate_covariance({0.0, V}, B, 10.0, 1e-2);
  EXPECT_LT((path.back().V - V).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Stationary, ScalarRoot) {
  const auto V = stationary_covariance(decompose_belief(scalar_B()));
  EXPECT_NEAR(V(0, 0), std::sqrt(2.0) - 1.0, 1e-14);
}

TEST(Stationary, LyapunovLimit) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
  B(0, 0) = 1.0;
  B(1, 1) = 0.5;
  EXPECT_NEAR(stationary_covariance(decompose_belief(B))(0, 0), 1.0, 1e-12);
}

TEST(Stationary, BruteForceOracle) {
  Eigen::MatrixXd B(3, 3);
  B << 1.0, 0.5, 0.3, 0.0, 1.0, 0.2, 0.0, 0.0, 1.5;
  const auto d = decompose_belief(B);
  const auto V = stationary_covariance(d);
  // Explicit Euler on the hidden block until the increment vanishes.
  const Eigen::MatrixXd CC = d.C * d.C.transpose();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2, 2);
  const double h = 1e-3;
  for (int k = 0; k < 200000; ++k) {
    const Eigen::MatrixXd step =
        h * (Eigen::MatrixXd::Identity(2, 2) - d.Btilde * W - W * d.Btilde.transpose() - W * CC * W);
    W += step;
    if (step.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  EXPECT_LT((V - W).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(stationary_residual(d, V), 1e-12);
}

TEST(Lyapunov, SolvesEquation) {
  Eigen::MatrixXd M(3, 3);
  M << 2, 0.3, 0, -0.1, 1, 0.4, 0.2, 0, 1.5;
  Eigen::MatrixXd Q(3, 3);
  Q << 1, 0.2, 0, 0.2, 2, 0.1, 0, 0.1, 0.5;
  const auto X = lyapunov_solve(M, Q);
  EXPECT_LT((M * X + X * M.transpose() - Q).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Lyapunov, SingularRejected) {
  Eigen::MatrixXd M(2, 2);
  M << 1, 0, 0, -1;
  EXPECT_THROW(lyapunov_solve(M, Eigen::MatrixXd::Identity(2, 2)), NumericalError);
}

TEST(FilterStep, PureMeanReversion) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 3);
  B(0, 0) = 1.0;
  B(1, 1) = 0.5;
  B(2, 2) = 2.0;
  const auto d = decompose_belief(B);
  const Eigen::MatrixXd V = stationary_covariance(d);
  const FilterState fs{Eigen::Vector2d(1.0, -2.0), 0, 0.0};
  const auto next = filter_step(fs, 0.7, 0.05, 0.01, d, V);
  EXPECT_NEAR(next.xhat(0), 1.0 - 0.5 * 0.01, 1e-15);
  EXPECT_NEAR(next.xhat(1), -2.0 + 2.0 * 2.0 * 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(next.t, 0.01);
}

TEST(FilterStep, ObservationGain) {
  const auto d = decompose_belief(scalar_B());
  const Eigen::MatrixXd V = Eigen::MatrixXd::Constant(1, 1, std::sqrt(2.0) - 1.0);
  const auto next = filter_step({Eigen::VectorXd::Zero(1), 0, 0.0}, 0.0, 0.01, 1e-3, d, V);
  EXPECT_NEAR(next.xhat(0), -(std::sqrt(2.0) - 1.0) * 0.01, 1e-15);
  EXPECT_NEAR(next.xhat(0), -0.00414213562, 1e-11);
}

TEST(FilterStep, SteadyStateFormAgrees) {
  Eigen::MatrixXd B(3, 3);
  B << 0.7, 0.5, 0.3, 0.2, 1.0, 0.2, -0.1, 0.0, 1.5;
  const auto d = decompose_belief(B);
  const auto V = stationary_covariance(d);
  const auto f = SteadyStateFilter::from(d, V);
  const Eigen::Vector2d xhat(0.3, -0.4);
  const double x = 0.8, dx = -0.03, dt = 1e-3;
  const Eigen::VectorXd fast = xhat + f.drift_x * x * dt + f.gain * dx + f.drift_xhat * xhat * dt;
  const auto slow = filter_step({xhat, 0, 0.0}, x, dx, dt, d, V);
  EXPECT_LT((fast - slow.xhat).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Innovation, Formula) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
  B(1, 1) = 1.0;
  EXPECT_EQ(innovation_increment(0.5, 0.03, Eigen::VectorXd::Ones(1), 0.01, decompose_belief(B)), 0.03);
  EXPECT_NEAR(innovation_increment(1.0, 0.0, Eigen::VectorXd::Zero(1), 0.01,
                                   decompose_belief(scalar_B())),
              0.01, 1e-15);
}
