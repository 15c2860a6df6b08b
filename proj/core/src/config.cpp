#include "hetbelief/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "hetbelief/errors.hpp"

namespace hetbelief {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ValidationError(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

SimConfig parse_simulation(const json& s) {
  reject_unknown(s,
                 {"truth", "t_end", "dt", "n_paths", "seed", "x0", "hidden_init",
                  "posterior_agent", "record_stride"},
                 "simulation");
  SimConfig cfg;
  if (s.contains("truth")) {
    const auto& truth = s.at("truth");
    if (truth.is_string()) {
      if (truth.get<std::string>() != "p0") {
        throw ValidationError("simulation.truth must be \"p0\" or an agent index");
      }
    } else {
      cfg.truth_agent = truth.get<int>();
    }
  }
  cfg.t_end = get_or(s, "t_end", cfg.t_end);
  cfg.dt = get_or(s, "dt", cfg.dt);
  cfg.n_paths = get_or<std::size_t>(s, "n_paths", cfg.n_paths);
  cfg.seed = get_or<std::uint64_t>(s, "seed", cfg.seed);
  cfg.x0 = get_or(s, "x0", cfg.x0);
  cfg.posterior_agent = get_or(s, "posterior_agent", cfg.posterior_agent);
  cfg.record_stride = get_or<std::size_t>(s, "record_stride", cfg.record_stride);
  if (s.contains("hidden_init")) {
    const auto& init = s.at("hidden_init");
    if (init.is_array()) {
      cfg.hidden_init = HiddenInit::Fixed;
      cfg.hidden0 = vector_from_json(init, "simulation.hidden_init");
    } else {
      const auto mode = init.get<std::string>();
      if (mode == "default") cfg.hidden_init = HiddenInit::Default;
      else if (mode == "stationary") cfg.hidden_init = HiddenInit::Stationary;
      else if (mode == "posterior") cfg.hidden_init = HiddenInit::Posterior;
      else if (mode == "zero") cfg.hidden_init = HiddenInit::Zero;
      else throw ValidationError("simulation.hidden_init: unknown mode \"" + mode + "\"");
    }
  }
  return cfg;
}

void parse_pricing(const json& p, ModelConfig& cfg) {
  reject_unknown(p,
                 {"tau_max", "dtau", "t_max", "zbar", "blowup_bound", "step_tol", "decay_tol",
                  "quad_points", "mc_paths", "mc_dt", "mc_seed"},
                 "pricing");
  cfg.riccati.tau_max = get_or(p, "tau_max", cfg.riccati.tau_max);
  cfg.riccati.dtau = get_or(p, "dtau", cfg.riccati.dtau);
  cfg.riccati.blowup_bound = get_or(p, "blowup_bound", cfg.riccati.blowup_bound);
  cfg.riccati.step_tol = get_or(p, "step_tol", cfg.riccati.step_tol);
  cfg.price.T_max = get_or(p, "t_max", cfg.price.T_max);
  cfg.price.decay_tol = get_or(p, "decay_tol", cfg.price.decay_tol);
  cfg.price.quad_points = get_or<std::size_t>(p, "quad_points", cfg.price.quad_points);
  cfg.mc.n_paths = get_or<std::size_t>(p, "mc_paths", cfg.mc.n_paths);
  cfg.mc.dt = get_or(p, "mc_dt", cfg.mc.dt);
  cfg.mc.seed = get_or<std::uint64_t>(p, "mc_seed", cfg.mc.seed);
  if (p.contains("zbar")) cfg.zbar = vector_from_json(p.at("zbar"), "pricing.zbar");
  if (!(cfg.riccati.tau_max > 0.0) || !(cfg.riccati.dtau > 0.0)) {
    throw ValidationError("pricing: tau_max and dtau must be > 0");
  }
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) {
    throw ValidationError(what + ": expected a non-empty array of rows");
  }
  const std::size_t r = rows.size();
  const std::size_t c = rows.at(0).is_array() ? rows.at(0).size() : 0;
  if (c == 0) throw ValidationError(what + ": rows must be non-empty arrays");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    const auto& row = rows.at(i);
    if (!row.is_array() || row.size() != c) {
      throw ValidationError(what + ": ragged matrix (row " + std::to_string(i) + ")");
    }
    for (std::size_t j = 0; j < c; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.at(j).get<double>();
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& values, const std::string& what) {
  if (!values.is_array()) throw ValidationError(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = values.at(i).get<double>();
  }
  return v;
}

Eigen::VectorXd ModelConfig::evaluation_state() const {
  if (zbar) return *zbar;
  Eigen::VectorXd z(market.stacked_dim());
  z(0) = simulation.x0;
  for (std::size_t j = 0; j < agents.size(); ++j) {
    z.segment(1 + static_cast<Eigen::Index>(j) * (market.n - 1), market.n - 1) = agents[j].xhat0;
  }
  return z;
}

ModelConfig parse_config(const json& doc) {
  ModelConfig cfg;
  try {
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");
    reject_unknown(doc, {"n", "rho", "a0", "sigma", "agents", "simulation", "pricing"}, "config");
    cfg.market.n = doc.at("n").get<int>();
    cfg.market.rho = doc.at("rho").get<double>();
    cfg.market.a0 = doc.at("a0").get<double>();
    cfg.market.sigma = doc.at("sigma").get<double>();
    const auto& agents = doc.at("agents");
    if (!agents.is_array()) throw ValidationError("config: agents must be an array");
    cfg.market.J = static_cast<int>(agents.size());
    validate(cfg.market);
    for (std::size_t j = 0; j < agents.size(); ++j) {
      const auto& a = agents.at(j);
      const std::string who = "agent " + std::to_string(j);
      reject_unknown(a, {"gamma", "B", "xhat0"}, who);
      const Eigen::MatrixXd B = matrix_from_json(a.at("B"), who + ".B");
      if (B.rows() != cfg.market.n || B.cols() != cfg.market.n) {
        throw ValidationError(who + ": B must be " + std::to_string(cfg.market.n) + "x" +
                              std::to_string(cfg.market.n) + ", got " + std::to_string(B.rows()) +
                              "x" + std::to_string(B.cols()));
      }
      auto belief = AgentBelief::from_matrix(B, a.at("gamma").get<double>());
      if (a.contains("xhat0")) belief.xhat0 = vector_from_json(a.at("xhat0"), who + ".xhat0");
      cfg.agents.push_back(std::move(belief));
    }
    validate(cfg.market, cfg.agents);
    if (doc.contains("simulation")) cfg.simulation = parse_simulation(doc.at("simulation"));
    cfg.simulation.validate(cfg.market);
    if (doc.contains("pricing")) parse_pricing(doc.at("pricing"), cfg);
    if (cfg.zbar && cfg.zbar->size() != cfg.market.stacked_dim()) {
      throw ValidationError("pricing.zbar must have length " +
                            std::to_string(cfg.market.stacked_dim()));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.source = doc;
  return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace hetbelief
