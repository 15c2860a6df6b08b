#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hetbelief/model.hpp"

namespace hetbelief {

/// Coefficients of the stacked economy in the state Zbar = (x, xhat^1, ..., xhat^J):
///   dZbar = B_bar Zbar dt + Q_bar dx,
///   d log zeta = -rho dt - Gamma sigma dx + (Gamma/J)(alpha_bar' Zbar dx - Zbar' beta_bar Zbar dt / 2).
struct EconomyCoefficients {
  int n = 2;
  int J = 1;
  double Gamma = 1.0;  // 1/Gamma = sum_j 1/gamma_j
  Eigen::VectorXd alpha_bar;
  Eigen::MatrixXd beta_bar;
  Eigen::VectorXd A1;  // stacked -(A + V C b11)
  Eigen::MatrixXd B1;  // block diagonal -(Btilde + V C C')
  Eigen::VectorXd Q1;  // stacked -V C
  Eigen::MatrixXd B_bar;
  Eigen::VectorXd Q_bar;

  int dim() const { return 1 + J * (n - 1); }
};

/// Zbar, with Zbar(0) the observed x.
struct StackedState {
  Eigen::VectorXd z;

  double x() const { return z(0); }
};

/// Builds the stacked coefficients. Every belief needs its Vtilde.
EconomyCoefficients assemble_economy(const MarketParams& params,
                                     const std::vector<AgentBelief>& beliefs);

/// Concatenates x and each agent's filter mean.
StackedState stack_state(double x, const std::vector<Eigen::VectorXd>& xhats);

StackedState stacked_step(const StackedState& state, double dx, double dt,
                          const EconomyCoefficients& coeffs);

double log_spd_increment(const StackedState& state, double dx, double dt,
                         const EconomyCoefficients& coeffs, const MarketParams& params);

/// Minus the drift of d zeta / zeta under P0:
///   r = rho + (Gamma/2J) Z' beta Z - (Gamma^2/2) (alpha' Z / J - sigma)^2.
double riskless_rate(const StackedState& state, const EconomyCoefficients& coeffs,
                     const MarketParams& params);

/// Minus the dx-loading of d zeta / zeta: kappa = Gamma sigma - (Gamma/J) alpha' Z.
double market_price_of_risk(const StackedState& state, const EconomyCoefficients& coeffs,
                            const MarketParams& params);

}  // namespace hetbelief
