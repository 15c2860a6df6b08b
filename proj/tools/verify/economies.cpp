#include "verify/economies.hpp"

#include <Eigen/Eigenvalues>

#include "hetbelief/filtering.hpp"
#include "hetbelief/rng.hpp"

namespace hetbelief::verify {
namespace {

TestEconomy finish(MarketParams params, std::vector<AgentBelief> agents) {
  params.J = static_cast<int>(agents.size());
  attach_stationary_covariances(agents);
  return {params, std::move(agents)};
}

}  // namespace

TestEconomy single_agent_economy() {
  MarketParams p{.n = 2, .J = 1, .rho = 0.5, .a0 = 1.0, .sigma = 0.2};
  Eigen::MatrixXd B(2, 2);
  B << 0.2, 0.3, 0.1, 1.0;
  return finish(p, {AgentBelief::from_matrix(B, 1.0)});
}

TestEconomy two_agent_economy() {
  MarketParams p{.n = 2, .J = 2, .rho = 0.5, .a0 = 1.0, .sigma = 0.2};
  Eigen::MatrixXd B1(2, 2), B2(2, 2);
  B1 << 0.2, 0.3, 0.1, 1.0;
  B2 << 0.4, -0.2, 0.0, 0.7;
  return finish(p, {AgentBelief::from_matrix(B1, 1.0), AgentBelief::from_matrix(B2, 2.0)});
}

TestEconomy decoupled_economy(double rho, double a0, double sigma, double gamma) {
  MarketParams p{.n = 2, .J = 1, .rho = rho, .a0 = a0, .sigma = sigma};
  Eigen::MatrixXd B(2, 2);
  B << 0.0, 0.0, 0.5, 1.0;
  return finish(p, {AgentBelief::from_matrix(B, gamma)});
}

Eigen::MatrixXd random_stable_belief(int n, std::uint64_t seed) {
  PathRng rng(seed, 0);
  const auto min_real = [](const Eigen::MatrixXd& M) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues().real().minCoeff();
  };
  while (true) {
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = 0.5 * rng.normal();
    // Shift the hidden block into the right half plane, then the whole matrix.
    const double shift_hidden = 0.3 + 0.5 * rng.uniform() -
                                std::min(0.0, min_real(B.bottomRightCorner(n - 1, n - 1)));
    B.diagonal().array() += shift_hidden;
    if (min_real(B) > 0.05 && min_real(B.bottomRightCorner(n - 1, n - 1)) > 0.05) {
      return B;
    }
  }
}

}  // namespace hetbelief::verify
