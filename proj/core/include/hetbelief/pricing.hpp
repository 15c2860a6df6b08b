#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hetbelief/economy.hpp"
#include "hetbelief/model.hpp"

namespace hetbelief {

/// Right-hand side of the exponential-quadratic system in tau = T - t.
struct RiccatiRates {
  Eigen::MatrixXd da;
  Eigen::RowVectorXd db;
  double dc = 0.0;
};

/// da/dtau = sym(2 a B + (2G/J) a Q alpha') - (G/J) beta + a Q Q' a + (G/J)^2 alpha alpha'
/// db/dtau = b B + b Q Q' a - (G^2 sigma/J) alpha' + (G/J) b Q alpha' - G sigma Q' a
/// dc/dtau = Q' a Q / 2 + (b Q)^2 / 2 + G^2 sigma^2 / 2 - G sigma b Q
/// theta enters only through the boundary values.
RiccatiRates ode_rhs(const Eigen::MatrixXd& a, const Eigen::RowVectorXd& b, double c,
                     const EconomyCoefficients& coeffs, const MarketParams& params);

/// The a-equation exactly as it arises from the dt-term, before
/// symmetrization. Only its symmetric part is determined by the model.
Eigen::MatrixXd raw_a_rhs(const Eigen::MatrixXd& a, const EconomyCoefficients& coeffs);

struct RiccatiOptions {
  double tau_max = 1.0;
  double dtau = 1e-3;
  /// theta at which b and c are stored; sensitivities let eval_VT move to any theta.
  double theta = 0.0;
  double blowup_bound = 1e8;
  /// Per-step tolerance on |two half steps - one full step|, relative to 1 + |y|.
  double step_tol = 1e-10;
  int max_halvings = 20;
};

/// Solution on the uniform grid tau_k = k * dtau. Matrices are stored
/// column-major, one grid node per column.
struct RiccatiSolution {
  int dim = 0;
  double dtau = 0.0;
  double theta = 0.0;
  std::vector<double> taus;
  Eigen::MatrixXd a_data;   // dim*dim x nodes
  Eigen::MatrixXd b_data;   // dim x nodes
  Eigen::MatrixXd db_data;  // dim x nodes, d b / d theta
  std::vector<double> c;
  std::vector<double> dc_dtheta;
  /// c is quadratic in theta; this is its (constant) second derivative.
  std::vector<double> d2c_dtheta2;

  std::size_t size() const { return taus.size(); }
  double tau_max() const { return taus.back(); }
  Eigen::Map<const Eigen::MatrixXd> a(std::size_t k) const {
    return {a_data.col(static_cast<Eigen::Index>(k)).data(), dim, dim};
  }
  Eigen::RowVectorXd b(std::size_t k) const {
    return b_data.col(static_cast<Eigen::Index>(k)).transpose();
  }
  Eigen::RowVectorXd db_dtheta(std::size_t k) const {
    return db_data.col(static_cast<Eigen::Index>(k)).transpose();
  }
};

/// RK4 with step-halving error control from tau = 0 to tau_max. Throws
/// NumericalError on blowup (|a|_max above the bound) or a stalled step
/// controller; the message carries the escape tau.
RiccatiSolution solve_riccati(const EconomyCoefficients& coeffs, const MarketParams& params,
                              const RiccatiOptions& options);

/// V^T = E0[exp(-G sigma (x_T - x_t) + (G/J)(int alpha'Z dx - int Z'beta Z du / 2)
///            + theta (sigma x_T + a0))] = exp(Z'aZ/2 + bZ + c).
/// Linear interpolation in tau between grid nodes.
double eval_VT(const RiccatiSolution& sol, double tau, const Eigen::VectorXd& zbar, double theta);

/// d V^T / d theta from the sensitivity equations.
double eval_dVT_dtheta(const RiccatiSolution& sol, double tau, const Eigen::VectorXd& zbar,
                       double theta);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  double dt = 1e-3;
};

/// Direct simulation of V^T under P0 (x Brownian, Zbar by stacked Euler steps).
McEstimate mc_oracle_VT(const EconomyCoefficients& coeffs, const MarketParams& params,
                        double tau, const Eigen::VectorXd& zbar, double theta,
                        const McOptions& options);

/// Same simulation, reused for every (tau, theta) pair; result[i][j] is for
/// taus[i], thetas[j].
std::vector<std::vector<McEstimate>> mc_oracle_VT_grid(const EconomyCoefficients& coeffs,
                                                       const MarketParams& params,
                                                       const std::vector<double>& taus,
                                                       const Eigen::VectorXd& zbar,
                                                       const std::vector<double>& thetas,
                                                       const McOptions& options);

struct PriceQuote {
  double S = 0.0;
  Eigen::VectorXd zbar;
  double T_max = 0.0;
  double error_estimate = 0.0;
  double tail = 0.0;
  std::vector<double> taus;
  std::vector<double> integrand;
};

struct PriceOptions {
  /// <= 0 means 10 / rho.
  double T_max = 0.0;
  /// Number of quadrature intervals; 0 uses the solver grid. Rounded up to a
  /// multiple of 4.
  std::size_t quad_points = 0;
  /// |integrand(T_max)| must be below decay_tol * max |integrand|.
  double decay_tol = 1e-2;

  double horizon(const MarketParams& params) const { return T_max > 0.0 ? T_max : 10.0 / params.rho; }
};

/// S = int_0^inf exp(-rho tau) dV^T/dtheta|_{theta=0} dtau: Simpson over
/// [0, T_max] plus a geometric tail. Throws NumericalError when the integrand
/// has not decayed by T_max.
PriceQuote stock_price(const RiccatiSolution& sol, const Eigen::VectorXd& zbar,
                       const MarketParams& params, const PriceOptions& options = {});

struct McPrice {
  double S = 0.0;
  double std_error = 0.0;
  double tail = 0.0;
};

/// Monte Carlo price: per path, Simpson over [0, T_max] of
/// exp(-rho tau) (zeta ratio) (a0 + sigma x), then the same geometric tail
/// applied to the mean integrand. T_max / dt must be a multiple of 4.
McPrice mc_price_oracle(const EconomyCoefficients& coeffs, const MarketParams& params,
                        const Eigen::VectorXd& zbar, double T_max, const McOptions& options);

}  // namespace hetbelief
