#pragma once

#include <cstdint>
#include <vector>

#include "hetbelief/model.hpp"

namespace hetbelief::verify {

struct TestEconomy {
  MarketParams params;
  std::vector<AgentBelief> agents;  // stationary covariances attached
};

/// J = 1, n = 2: rho 0.5, a0 1, sigma 0.2, gamma 1, B = [[0.2, 0.3], [0.1, 1.0]].
TestEconomy single_agent_economy();

/// The single-agent economy plus a second agent, gamma 2, B = [[0.4, -0.2], [0.0, 0.7]].
TestEconomy two_agent_economy();

/// b11 = 0 and C = 0 for every agent: x is a Brownian motion nobody filters.
/// Built directly (B has a zero eigenvalue, so load-time validation would
/// reject it).
TestEconomy decoupled_economy(double rho, double a0, double sigma, double gamma);

/// Random n x n belief with eigenvalues of B and Btilde in the right half plane.
Eigen::MatrixXd random_stable_belief(int n, std::uint64_t seed);

}  // namespace hetbelief::verify
