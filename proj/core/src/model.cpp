#include "hetbelief/model.hpp"

#include <string>

#include <Eigen/Eigenvalues>

#include "hetbelief/errors.hpp"

namespace hetbelief {

Eigen::MatrixXd BlockDecomposition::reassemble() const {
  const Eigen::Index m = Btilde.rows();
  Eigen::MatrixXd B(m + 1, m + 1);
  B(0, 0) = b11;
  B.block(0, 1, 1, m) = C.transpose();
  B.block(1, 0, m, 1) = A;
  B.block(1, 1, m, m) = Btilde;
  return B;
}

AgentBelief AgentBelief::from_matrix(Eigen::MatrixXd B, double gamma) {
  AgentBelief belief;
  belief.decomp = decompose_belief(B);
  belief.xhat0 = Eigen::VectorXd::Zero(B.rows() - 1);
  belief.B = std::move(B);
  belief.gamma = gamma;
  return belief;
}

const Eigen::MatrixXd& AgentBelief::stationary_cov() const {
  if (!Vtilde) {
    throw ValidationError("agent belief has no stationary covariance attached");
  }
  return *Vtilde;
}

BlockDecomposition decompose_belief(const Eigen::MatrixXd& B) {
  if (B.rows() != B.cols()) {
    throw ValidationError("belief matrix is not square (" + std::to_string(B.rows()) + "x" +
                          std::to_string(B.cols()) + ")");
  }
  if (B.rows() < 2) {
    throw ValidationError("belief matrix must be at least 2x2");
  }
  const Eigen::Index m = B.rows() - 1;
  BlockDecomposition d;
  d.b11 = B(0, 0);
  d.C = B.block(0, 1, 1, m).transpose();
  d.A = B.block(1, 0, m, 1);
  d.Btilde = B.block(1, 1, m, m);
  return d;
}

StabilityReport validate_stability(const Eigen::MatrixXd& B, double tol) {
  StabilityReport report;
  report.pass = true;
  if (B.size() == 0) {
    return report;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(B, /*computeEigenvectors=*/false);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    EigenDiagnostic diag{solver.eigenvalues()[i], solver.eigenvalues()[i].real() > tol};
    report.pass = report.pass && diag.pass;
    report.eigenvalues.push_back(diag);
  }
  return report;
}

void validate(const MarketParams& params) {
  if (params.n < 2) {
    throw ValidationError("n must be >= 2 (got " + std::to_string(params.n) + ")");
  }
  if (params.J < 1) {
    throw ValidationError("at least one agent is required");
  }
  if (!(params.sigma > 0.0)) {
    throw ValidationError("sigma must be > 0");
  }
  if (!(params.rho > 0.0)) {
    throw ValidationError("rho must be > 0");
  }
}

void validate(const MarketParams& params, const std::vector<AgentBelief>& agents) {
  validate(params);
  if (static_cast<int>(agents.size()) != params.J) {
    throw ValidationError("J does not match the number of agents");
  }
  for (std::size_t j = 0; j < agents.size(); ++j) {
    const auto& agent = agents[j];
    const std::string who = "agent " + std::to_string(j) + ": ";
    if (agent.B.rows() != params.n || agent.B.cols() != params.n) {
      throw ValidationError(who + "B must be " + std::to_string(params.n) + "x" +
                            std::to_string(params.n) + ", got " + std::to_string(agent.B.rows()) +
                            "x" + std::to_string(agent.B.cols()));
    }
    if (!(agent.gamma > 0.0)) {
      throw ValidationError(who + "gamma must be > 0");
    }
    if (!agent.B.allFinite()) {
      throw ValidationError(who + "B has non-finite entries");
    }
    if (!validate_stability(agent.B).pass) {
      throw ValidationError(who + "eigenvalue with non-positive real part");
    }
    if (agent.xhat0.size() != params.n - 1) {
      throw ValidationError(who + "xhat0 must have length n-1");
    }
  }
}

}  // namespace hetbelief
