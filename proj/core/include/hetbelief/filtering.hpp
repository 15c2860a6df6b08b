#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hetbelief/model.hpp"

namespace hetbelief {

/// Conditional covariance of the full state given the observation history.
/// First row and column are zero (x is observed).
struct CovarianceState {
  double t = 0.0;
  Eigen::MatrixXd V;
};

/// One agent's conditional mean of the hidden components.
struct FilterState {
  Eigen::VectorXd xhat;
  int agent = 0;
  double t = 0.0;
};

/// dV/dt for the conditional covariance:
///   -[(BV)_ji + (BV)_ij - d_ij + ((BV)_1i - d_i1)((BV)_1j - d_j1)].
Eigen::MatrixXd cov_rhs(const Eigen::MatrixXd& V, const Eigen::MatrixXd& B);

/// Classical RK4 on cov_rhs with symmetrization after every step. Throws
/// NumericalError if the smallest eigenvalue drops below -1e-8.
std::vector<CovarianceState> integrate_covariance(const CovarianceState& V0,
                                                  const Eigen::MatrixXd& B, double t_end,
                                                  double dt = 1e-3);

struct StationaryOptions {
  double rhs_tol = 1e-12;
  /// Pseudo-time limit; <= 0 means 200 / (smallest real part of Btilde's spectrum).
  double max_pseudo_time = 0.0;
  /// Pseudo-time step; <= 0 picks one from the norms of Btilde and C.
  double dt = 0.0;
  bool newton_polish = true;
  double newton_cond_limit = 1e12;
};

/// Stabilizing solution of Btilde V + V Btilde' + V C C' V = I, found by
/// marching the covariance ODE from V = 0, then a Newton polish.
Eigen::MatrixXd stationary_covariance(const BlockDecomposition& decomp,
                                      const StationaryOptions& options = {});

/// Solves M X + X M' = Q through the Kronecker-form linear system. Throws
/// NumericalError when the system's reciprocal condition number is below
/// 1 / cond_limit.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Q,
                               double cond_limit = 1e12);

/// Max-norm of Btilde V + V Btilde' + V C C' V - I.
double stationary_residual(const BlockDecomposition& decomp, const Eigen::MatrixXd& Vtilde);

/// Fills Vtilde for every agent. Logs a warning to stderr for agents whose
/// filter never reacts to data (A = 0 and C = 0).
void attach_stationary_covariances(std::vector<AgentBelief>& agents,
                                   const StationaryOptions& options = {});

/// Euler step of
///   dxhat = -(A + V C b11) x dt - V C dx - (Btilde + V C C') xhat dt.
FilterState filter_step(const FilterState& fs, double x, double dx, double dt,
                        const BlockDecomposition& decomp, const Eigen::MatrixXd& Vtilde);

/// dN = dx + (b11 x + C' xhat) dt.
double innovation_increment(double x, double dx, const Eigen::VectorXd& xhat, double dt,
                            const BlockDecomposition& decomp);

/// Precomputed constant-gain form of filter_step for hot loops:
///   xhat += drift_x * x * dt + gain * dx + drift_xhat * xhat * dt.
struct SteadyStateFilter {
  Eigen::VectorXd drift_x;     // -(A + V C b11)
  Eigen::VectorXd gain;        // -V C
  Eigen::MatrixXd drift_xhat;  // -(Btilde + V C C')

  static SteadyStateFilter from(const BlockDecomposition& decomp, const Eigen::MatrixXd& Vtilde);
};

}  // namespace hetbelief
