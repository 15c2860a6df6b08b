#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hetbelief {

/// Economy-wide constants. The dividend is delta_t = a0 + sigma * x_t, where
/// x_t is the first (observed) component of the latent state.
struct MarketParams {
  int n = 2;           // state dimension, >= 2
  int J = 1;           // number of agents
  double rho = 0.05;   // discount rate
  double a0 = 1.0;
  double sigma = 0.1;  // dividend loading, > 0

  int hidden_dim() const { return n - 1; }
  /// Dimension of the stacked state (x, xhat^1, ..., xhat^J).
  int stacked_dim() const { return 1 + J * (n - 1); }
};

/// B = [[b11, C'], [A, Btilde]].
struct BlockDecomposition {
  double b11 = 0.0;
  Eigen::VectorXd C;       // first row of B without b11
  Eigen::VectorXd A;       // first column of B without b11
  Eigen::MatrixXd Btilde;  // lower-right (n-1)x(n-1) block

  Eigen::MatrixXd reassemble() const;
};

struct AgentBelief {
  Eigen::MatrixXd B;
  double gamma = 1.0;
  BlockDecomposition decomp;
  /// Stationary conditional covariance of the hidden block; filled by
  /// attach_stationary_covariances().
  std::optional<Eigen::MatrixXd> Vtilde;
  /// Filter initial condition, defaults to zero.
  Eigen::VectorXd xhat0;

  /// Builds a belief with its decomposition populated and xhat0 = 0.
  static AgentBelief from_matrix(Eigen::MatrixXd B, double gamma);
  const Eigen::MatrixXd& stationary_cov() const;
};

BlockDecomposition decompose_belief(const Eigen::MatrixXd& B);

struct EigenDiagnostic {
  std::complex<double> value;
  bool pass = false;
};

struct StabilityReport {
  std::vector<EigenDiagnostic> eigenvalues;
  bool pass = false;
};

/// Stability of the drift -B: every eigenvalue of B needs real part > tol.
StabilityReport validate_stability(const Eigen::MatrixXd& B, double tol = 1e-9);

/// Throws ValidationError naming the first violated invariant.
void validate(const MarketParams& params);
void validate(const MarketParams& params, const std::vector<AgentBelief>& agents);

}  // namespace hetbelief
