#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetbelief/model.hpp"

namespace hetbelief {

/// How the true hidden state is initialized at t = 0.
enum class HiddenInit {
  Default,     // Stationary under an OU truth, Zero under P0
  Stationary,  // stationary law of the truth measure, conditional on x0
  Posterior,   // xhat0 + N(0, Vtilde) of one agent: its filter is exact from t = 0
  Zero,
  Fixed,       // SimConfig::hidden0
};

struct SimConfig {
  /// Truth measure: nullopt is P0 (X is a standard Brownian motion), otherwise
  /// the OU measure P^k of agent k.
  std::optional<int> truth_agent;
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  double x0 = 0.0;
  HiddenInit hidden_init = HiddenInit::Default;
  Eigen::VectorXd hidden0;
  /// Agent whose (xhat0, Vtilde) defines HiddenInit::Posterior; -1 selects the
  /// truth agent, or agent 0 under P0.
  int posterior_agent = -1;
  /// Keep every k-th grid point (the terminal point is always kept).
  std::size_t record_stride = 1;

  std::size_t steps() const;
  void validate(const MarketParams& params) const;
};

/// One simulated scenario. Everything except `hidden` and `log_lambda` is a
/// function of the observed path x, i.e. visible to the agents.
struct PathBundle {
  std::uint64_t seed = 0;
  std::size_t path_index = 0;
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> dividends;
  /// True hidden components (rows = recorded times). Not observable.
  Eigen::MatrixXd hidden;
  /// Per agent: filter means, rows = recorded times, cols = n - 1.
  std::vector<Eigen::MatrixXd> xhat;
  /// Per agent: accumulated innovation N.
  std::vector<std::vector<double>> innovation;
  /// Per agent: log of the projected density E0[Lambda | observations].
  std::vector<std::vector<double>> log_lambda_hat;
  /// Per agent: log dP^j/dP0 computed from the full (hidden) path. Not observable.
  std::vector<std::vector<double>> log_lambda;
};

/// Simulates path `path_index` of the configured run. Every agent must have
/// its stationary covariance attached.
PathBundle simulate_path(const SimConfig& cfg, const MarketParams& params,
                         const std::vector<AgentBelief>& beliefs, std::size_t path_index);

/// Simulates all cfg.n_paths paths (in parallel blocks) and hands them to
/// `sink` in path order.
void simulate_truth(const SimConfig& cfg, const MarketParams& params,
                    const std::vector<AgentBelief>& beliefs,
                    const std::function<void(const PathBundle&)>& sink);

/// Recomputes log Lambda-hat for one agent from the recorded observation and
/// filter path: d log L = -(b11 x + C' xhat) dx - (b11 x + C' xhat)^2 dt / 2.
/// Requires record_stride == 1 so increments are the simulation increments.
std::vector<double> lambda_hat_path(const PathBundle& bundle, std::size_t agent,
                                    const AgentBelief& belief);

/// Cross-path means and variances at each recorded time.
class PathSummary {
 public:
  void add(const PathBundle& bundle);

  std::vector<std::string> columns() const;
  /// One row per recorded time: t, then (mean, var) for every tracked series.
  std::vector<std::vector<double>> rows() const;
  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
  std::vector<double> times_;
  std::vector<std::string> names_;
  // [time][series] running sums
  std::vector<std::vector<double>> sum_, sum_sq_;
};

}  // namespace hetbelief
