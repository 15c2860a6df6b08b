#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hetbelief/model.hpp"
#include "hetbelief/pricing.hpp"
#include "hetbelief/simulate.hpp"

namespace hetbelief {

/// Everything a run needs, read from one JSON file:
///
///   { "n": 2, "rho": 0.5, "a0": 1, "sigma": 0.2,
///     "agents": [ { "gamma": 1, "B": [[0.2, 0.3], [0.1, 1.0]], "xhat0": [0] } ],
///     "simulation": { "truth": "p0" | k, "t_end", "dt", "n_paths", "seed", "x0",
///                     "hidden_init": "default" | "stationary" | "posterior" | "zero" | [..],
///                     "posterior_agent", "record_stride" },
///     "pricing": { "tau_max", "dtau", "t_max", "zbar", "blowup_bound", "step_tol",
///                  "decay_tol", "quad_points", "mc_paths", "mc_dt", "mc_seed" } }
///
/// Matrices are row-major nested arrays. Agent indices are 0-based.
struct ModelConfig {
  MarketParams market;
  std::vector<AgentBelief> agents;
  SimConfig simulation;
  RiccatiOptions riccati;
  PriceOptions price;
  McOptions mc;
  std::optional<Eigen::VectorXd> zbar;
  /// The parsed document; its dump() is canonical (sorted keys).
  nlohmann::json source;

  /// Configured zbar, or (x0, xhat0^1, ..., xhat0^J).
  Eigen::VectorXd evaluation_state() const;
};

/// Validates everything except the stationary covariances (left unset).
ModelConfig parse_config(const nlohmann::json& doc);
ModelConfig load_config(const std::filesystem::path& path);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const std::string& what);
Eigen::VectorXd vector_from_json(const nlohmann::json& values, const std::string& what);

}  // namespace hetbelief
