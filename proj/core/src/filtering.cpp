#include "hetbelief/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "hetbelief/errors.hpp"

namespace hetbelief {
namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

Eigen::MatrixXd rk4_step(const Eigen::MatrixXd& V, const Eigen::MatrixXd& B, double dt) {
  const Eigen::MatrixXd k1 = cov_rhs(V, B);
  const Eigen::MatrixXd k2 = cov_rhs(V + 0.5 * dt * k1, B);
  const Eigen::MatrixXd k3 = cov_rhs(V + 0.5 * dt * k2, B);
  const Eigen::MatrixXd k4 = cov_rhs(V + dt * k3, B);
  return symmetrize(V + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

double min_eigenvalue(const Eigen::MatrixXd& V) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(V, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double min_real_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M, false);
  return solver.eigenvalues().real().minCoeff();
}

// Newton correction for F(V) = Bt V + V Bt' + V C C' V - I. With
// M = Bt + V C C' the linearization is the Lyapunov map D -> M D + D M'.
// Returns false when that map is too ill-conditioned to trust.
bool newton_polish(const BlockDecomposition& d, Eigen::MatrixXd& V, double cond_limit) {
  const Eigen::MatrixXd CC = d.C * d.C.transpose();
  const auto residual = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd F = d.Btilde * X + X * d.Btilde.transpose() + X * CC * X;
    F.diagonal().array() -= 1.0;
    return F;
  };
  Eigen::MatrixXd F = residual(V);
  for (int iter = 0; iter < 8; ++iter) {
    const double size = F.cwiseAbs().maxCoeff();
    if (size < 1e-15) {
      break;
    }
    Eigen::MatrixXd delta;
    try {
      delta = lyapunov_solve(d.Btilde + V * CC, -F, cond_limit);
    } catch (const NumericalError&) {
      return false;
    }
    const Eigen::MatrixXd next = symmetrize(V + delta);
    Eigen::MatrixXd Fnext = residual(next);
    if (Fnext.cwiseAbs().maxCoeff() >= size) {
      break;  // at roundoff
    }
    V = next;
    F = std::move(Fnext);
  }
  return true;
}

}  // namespace

Eigen::MatrixXd cov_rhs(const Eigen::MatrixXd& V, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd BV = B * V;
  // g_i = (BV)_1i - delta_i1
  Eigen::VectorXd g = BV.row(0).transpose();
  g(0) -= 1.0;
  Eigen::MatrixXd rhs = -(BV + BV.transpose() + g * g.transpose());
  rhs.diagonal().array() += 1.0;
  return rhs;
}

std::vector<CovarianceState> integrate_covariance(const CovarianceState& V0,
                                                  const Eigen::MatrixXd& B, double t_end,
                                                  double dt) {
  if (!(dt > 0.0)) {
    throw ValidationError("integrate_covariance: dt must be > 0");
  }
  if (V0.V.rows() != B.rows() || V0.V.cols() != B.cols()) {
    throw ValidationError("integrate_covariance: V0 and B shapes differ");
  }
  std::vector<CovarianceState> trajectory{V0};
  if (t_end <= V0.t) {
    return trajectory;
  }
  const auto steps = static_cast<long>(std::ceil((t_end - V0.t) / dt - 1e-9));
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::MatrixXd V = V0.V;
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = V0.t + static_cast<double>(k - 1) * dt;
    const double h = std::min(dt, t_end - t_prev);
    V = rk4_step(V, B, h);
    const double lowest = min_eigenvalue(V);
    if (lowest < -1e-8) {
      throw NumericalError("integrate_covariance: covariance lost positive semidefiniteness at t=" +
                           std::to_string(t_prev + h) +
                           " (smallest eigenvalue " + std::to_string(lowest) + ")");
    }
    trajectory.push_back({t_prev + h, V});
  }
  return trajectory;
}

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Q,
                               double cond_limit) {
  const Eigen::Index m = M.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  // vec(M X) = (I kron M) vec X; vec(X M') = (M kron I) vec X.
  Eigen::MatrixXd K(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      K.block(i * m, j * m, m, m) = I(i, j) * M + M(i, j) * I;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible() || !(lu.rcond() > 1.0 / cond_limit)) {
    throw NumericalError("lyapunov_solve: ill-conditioned system (rcond " +
                         std::to_string(lu.rcond()) + ")");
  }
  const Eigen::VectorXd x = lu.solve(Eigen::Map<const Eigen::VectorXd>(Q.data(), m * m));
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), m, m);
}

double stationary_residual(const BlockDecomposition& d, const Eigen::MatrixXd& Vtilde) {
  const Eigen::Index m = Vtilde.rows();
  const Eigen::MatrixXd F = d.Btilde * Vtilde + Vtilde * d.Btilde.transpose() +
                            Vtilde * d.C * d.C.transpose() * Vtilde -
                            Eigen::MatrixXd::Identity(m, m);
  return F.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd stationary_covariance(const BlockDecomposition& decomp,
                                      const StationaryOptions& options) {
  const Eigen::Index m = decomp.Btilde.rows();
  const double lambda_min = min_real_eigenvalue(decomp.Btilde);
  if (!(lambda_min > 0.0)) {
    throw ValidationError("stationary_covariance: Btilde has an eigenvalue with non-positive real part");
  }
  const double max_time = options.max_pseudo_time > 0.0 ? options.max_pseudo_time : 200.0 / lambda_min;

  const Eigen::MatrixXd B = decomp.reassemble();
  double dt = options.dt;
  if (!(dt > 0.0)) {
    // The Lyapunov solution bounds Vtilde by roughly 1/(2 lambda_min); keep
    // the RK4 step well inside its stability region for the linearization.
    const double scale = 2.0 * decomp.Btilde.norm() + decomp.C.squaredNorm() / lambda_min;
    dt = std::min(1e-2, 0.5 / std::max(scale, 1e-12));
  }

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(m + 1, m + 1);
  double t = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  while (t < max_time) {
    V = rk4_step(V, B, dt);
    t += dt;
    residual = cov_rhs(V, B).cwiseAbs().maxCoeff();
    if (residual < options.rhs_tol) {
      break;
    }
  }
  // Newton only polishes; it must start inside the basin of the
  // stabilizing solution that the marching converges to.
  const double polish_threshold = 1e-6;
  if (!(residual < polish_threshold)) {
    throw NumericalError("stationary_covariance: no convergence after pseudo-time " +
                         std::to_string(t) + " (residual " + std::to_string(residual) + ")");
  }
  Eigen::MatrixXd Vtilde = V.block(1, 1, m, m);
  bool polished = false;
  if (options.newton_polish) {
    polished = newton_polish(decomp, Vtilde, options.newton_cond_limit);
  }
  residual = stationary_residual(decomp, Vtilde);
  const double accept = polished ? std::max(options.rhs_tol, 1e-10) : options.rhs_tol * 10.0;
  if (!(residual < accept)) {
    throw NumericalError("stationary_covariance: no convergence after pseudo-time " +
                         std::to_string(t) + " (residual " + std::to_string(residual) + ")");
  }
  return Vtilde;
}

void attach_stationary_covariances(std::vector<AgentBelief>& agents,
                                   const StationaryOptions& options) {
  for (std::size_t j = 0; j < agents.size(); ++j) {
    auto& agent = agents[j];
    if (agent.decomp.A.isZero(0.0) && agent.decomp.C.isZero(0.0)) {
      std::cerr << "warning: agent " << j << " has A = 0 and C = 0; its filter ignores the data\n";
    }
    agent.Vtilde = stationary_covariance(agent.decomp, options);
  }
}

FilterState filter_step(const FilterState& fs, double x, double dx, double dt,
                        const BlockDecomposition& d, const Eigen::MatrixXd& Vtilde) {
  const Eigen::VectorXd VC = Vtilde * d.C;
  FilterState next = fs;
  next.xhat = fs.xhat - (d.A + VC * d.b11) * x * dt - VC * dx -
              (d.Btilde + VC * d.C.transpose()) * fs.xhat * dt;
  next.t = fs.t + dt;
  return next;
}

double innovation_increment(double x, double dx, const Eigen::VectorXd& xhat, double dt,
                            const BlockDecomposition& d) {
  return dx + (d.b11 * x + d.C.dot(xhat)) * dt;
}

SteadyStateFilter SteadyStateFilter::from(const BlockDecomposition& d,
                                          const Eigen::MatrixXd& Vtilde) {
  const Eigen::VectorXd VC = Vtilde * d.C;
  return {-(d.A + VC * d.b11), -VC, -(d.Btilde + VC * d.C.transpose())};
}

}  // namespace hetbelief
