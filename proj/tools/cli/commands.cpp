#include "cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hetbelief/config.hpp"
#include "hetbelief/csv.hpp"
#include "hetbelief/economy.hpp"
#include "hetbelief/errors.hpp"
#include "hetbelief/filtering.hpp"
#include "hetbelief/pricing.hpp"
#include "hetbelief/simulate.hpp"
#include "verify/suite.hpp"

namespace hetbelief::cli {
namespace {

using nlohmann::json;

/// Destination for the primary artifact: the --out file, or the console.
class Sink {
 public:
  Sink(const std::optional<std::filesystem::path>& out, std::ostream& console, RunManifest& manifest)
      : stream_(&console) {
    if (out) {
      file_ = std::make_unique<std::ofstream>(*out);
      if (!*file_) throw IoError("cannot open " + out->string() + " for writing");
      stream_ = file_.get();
      manifest.artifacts.push_back(out->string());
    }
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

ModelConfig load(const CommandOptions& options, RunManifest& manifest) {
  if (!options.config) throw ValidationError("--config is required");
  ModelConfig cfg = load_config(*options.config);
  manifest.config_hash = config_hash(cfg.source);
  if (options.seed) {
    cfg.simulation.seed = *options.seed;
    cfg.mc.seed = *options.seed;
  }
  if (options.paths) {
    cfg.simulation.n_paths = *options.paths;
    cfg.mc.n_paths = *options.paths;
  }
  if (options.dt) {
    if (!(*options.dt > 0.0)) throw ValidationError("--dt must be > 0");
    cfg.simulation.dt = *options.dt;
    cfg.mc.dt = *options.dt;
  }
  if (options.tau_max) {
    if (!(*options.tau_max > 0.0)) throw ValidationError("--tau-max must be > 0");
    cfg.riccati.tau_max = *options.tau_max;
  }
  if (options.t_max) {
    if (!(*options.t_max > 0.0)) throw ValidationError("--t-max must be > 0");
    cfg.price.T_max = *options.t_max;
  }
  cfg.simulation.validate(cfg.market);
  attach_stationary_covariances(cfg.agents);
  return cfg;
}

Eigen::VectorXd read_zbar(const CommandOptions& options, const ModelConfig& cfg) {
  Eigen::VectorXd z = cfg.evaluation_state();
  if (options.zbar) {
    std::ifstream f(*options.zbar);
    if (!f) throw ValidationError("cannot read " + options.zbar->string());
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("zbar: ") + e.what());
    }
    z = vector_from_json(doc.is_object() ? doc.at("zbar") : doc, "zbar");
  }
  if (z.size() != cfg.market.stacked_dim()) {
    throw ValidationError(fmt::format("zbar: expected {} entries, got {}", cfg.market.stacked_dim(),
                                      z.size()));
  }
  return z;
}

std::vector<std::string> path_columns(const ModelConfig& cfg) {
  std::vector<std::string> cols{"path_id", "t", "x", "delta"};
  for (std::size_t j = 0; j < cfg.agents.size(); ++j) {
    for (int k = 0; k < cfg.market.n - 1; ++k) cols.push_back(fmt::format("xhat_{}_{}", j, k));
    cols.push_back(fmt::format("N_{}", j));
    cols.push_back(fmt::format("loglamhat_{}", j));
  }
  return cols;
}

}  // namespace

void run_simulate(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  manifest.seed = cfg.simulation.seed;
  Sink sink(options.out, console, manifest);
  if (options.summary) {
    PathSummary summary;
    simulate_truth(cfg.simulation, cfg.market, cfg.agents,
                   [&](const PathBundle& b) { summary.add(b); });
    CsvWriter w(sink.stream(), summary.columns());
    for (const auto& row : summary.rows()) {
      w.write(CsvRecord(row.begin(), row.end()));
    }
  } else {
    CsvWriter w(sink.stream(), path_columns(cfg));
    simulate_truth(cfg.simulation, cfg.market, cfg.agents, [&](const PathBundle& b) {
      for (std::size_t i = 0; i < b.times.size(); ++i) {
        CsvRecord rec{static_cast<std::int64_t>(b.path_index), b.times[i], b.x[i], b.dividends[i]};
        for (std::size_t j = 0; j < b.xhat.size(); ++j) {
          for (Eigen::Index k = 0; k < b.xhat[j].cols(); ++k) {
            rec.emplace_back(b.xhat[j](static_cast<Eigen::Index>(i), k));
          }
          rec.emplace_back(b.innovation[j][i]);
          rec.emplace_back(b.log_lambda_hat[j][i]);
        }
        w.write(rec);
      }
    });
  }
  sink.close();
}

void run_stationary_cov(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  Sink sink(options.out, console, manifest);
  CsvWriter w(sink.stream(), {"agent", "row", "col", "value"});
  for (std::size_t j = 0; j < cfg.agents.size(); ++j) {
    const Eigen::MatrixXd& V = cfg.agents[j].stationary_cov();
    for (Eigen::Index r = 0; r < V.rows(); ++r) {
      for (Eigen::Index c = 0; c < V.cols(); ++c) {
        w.write({static_cast<std::int64_t>(j), static_cast<std::int64_t>(r),
                 static_cast<std::int64_t>(c), V(r, c)});
      }
    }
  }
  sink.close();
}

void run_cov_path(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  const int n = cfg.market.n;
  const double t_end = options.t_max ? *options.t_max : cfg.simulation.t_end;
  Sink sink(options.out, console, manifest);
  std::vector<std::string> cols{"agent", "t"};
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) cols.push_back(fmt::format("V_{}_{}", r, c));
  }
  CsvWriter w(sink.stream(), cols);
  for (std::size_t j = 0; j < cfg.agents.size(); ++j) {
    const CovarianceState start{0.0, Eigen::MatrixXd::Zero(n, n)};
    for (const auto& s : integrate_covariance(start, cfg.agents[j].B, t_end, cfg.simulation.dt)) {
      CsvRecord rec{static_cast<std::int64_t>(j), s.t};
      for (Eigen::Index i = 0; i < s.V.size(); ++i) rec.emplace_back(s.V.data()[i]);
      w.write(rec);
    }
  }
  sink.close();
}

void run_rate_path(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  ModelConfig cfg = load(options, manifest);
  cfg.simulation.record_stride = 1;
  manifest.seed = cfg.simulation.seed;
  const auto coeffs = assemble_economy(cfg.market, cfg.agents);
  Sink sink(options.out, console, manifest);
  CsvWriter w(sink.stream(), {"path_id", "t", "r", "kappa", "logzeta"});
  simulate_truth(cfg.simulation, cfg.market, cfg.agents, [&](const PathBundle& b) {
    double log_zeta = 0.0;
    std::vector<Eigen::VectorXd> xhats(b.xhat.size());
    for (std::size_t i = 0; i < b.times.size(); ++i) {
      for (std::size_t j = 0; j < b.xhat.size(); ++j) {
        xhats[j] = b.xhat[j].row(static_cast<Eigen::Index>(i)).transpose();
      }
      const StackedState z = stack_state(b.x[i], xhats);
      w.write({static_cast<std::int64_t>(b.path_index), b.times[i],
               riskless_rate(z, coeffs, cfg.market), market_price_of_risk(z, coeffs, cfg.market),
               log_zeta});
      if (i + 1 < b.times.size()) {
        log_zeta += log_spd_increment(z, b.x[i + 1] - b.x[i], b.times[i + 1] - b.times[i], coeffs,
                                      cfg.market);
      }
    }
  });
  sink.close();
}

void run_riccati(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  const auto coeffs = assemble_economy(cfg.market, cfg.agents);
  const auto sol = solve_riccati(coeffs, cfg.market, cfg.riccati);
  const int d = sol.dim;
  std::vector<std::string> cols{"tau"};
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) cols.push_back(fmt::format("a_{}_{}", r, c));
  }
  for (int k = 0; k < d; ++k) cols.push_back(fmt::format("b_{}", k));
  cols.push_back("c");
  for (int k = 0; k < d; ++k) cols.push_back(fmt::format("db_dtheta_{}", k));
  cols.push_back("dc_dtheta");
  cols.push_back("d2c_dtheta2");
  Sink sink(options.out, console, manifest);
  CsvWriter w(sink.stream(), cols);
  for (std::size_t k = 0; k < sol.size(); ++k) {
    CsvRecord rec{sol.taus[k]};
    const auto a = sol.a(k);
    for (Eigen::Index i = 0; i < a.size(); ++i) rec.emplace_back(a.data()[i]);
    const Eigen::RowVectorXd b = sol.b(k);
    for (Eigen::Index i = 0; i < b.size(); ++i) rec.emplace_back(b(i));
    rec.emplace_back(sol.c[k]);
    const Eigen::RowVectorXd db = sol.db_dtheta(k);
    for (Eigen::Index i = 0; i < db.size(); ++i) rec.emplace_back(db(i));
    rec.emplace_back(sol.dc_dtheta[k]);
    rec.emplace_back(sol.d2c_dtheta2[k]);
    w.write(rec);
  }
  sink.close();
}

void run_price(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  const Eigen::VectorXd zbar = read_zbar(options, cfg);
  const auto coeffs = assemble_economy(cfg.market, cfg.agents);
  RiccatiOptions ropt = cfg.riccati;
  ropt.tau_max = cfg.price.horizon(cfg.market);
  ropt.theta = 0.0;
  const auto sol = solve_riccati(coeffs, cfg.market, ropt);
  const auto quote = stock_price(sol, zbar, cfg.market, cfg.price);
  json doc;
  doc["S"] = quote.S;
  doc["error_estimate"] = quote.error_estimate;
  doc["T_max"] = quote.T_max;
  doc["tau_grid_size"] = sol.size();
  doc["tail"] = quote.tail;
  doc["zbar"] = std::vector<double>(zbar.data(), zbar.data() + zbar.size());
  Sink sink(options.out, console, manifest);
  sink.stream() << doc.dump(2) << '\n';
  sink.close();
}

void run_verify_vt(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  const ModelConfig cfg = load(options, manifest);
  manifest.seed = cfg.mc.seed;
  const Eigen::VectorXd zbar = read_zbar(options, cfg);
  const auto coeffs = assemble_economy(cfg.market, cfg.agents);
  const double T = cfg.riccati.tau_max;
  const std::vector<double> taus{0.25 * T, 0.5 * T, T};
  const std::vector<double> thetas{0.0, 0.3};
  const auto rows = verify::compare_vt(coeffs, cfg.market, zbar, taus, thetas, cfg.mc, cfg.riccati.dtau);
  console << verify::render_vt_table(rows);
  if (options.out) {
    Sink sink(options.out, console, manifest);
    CsvWriter w(sink.stream(), {"tau", "theta", "riccati", "mc_mean", "mc_std_error", "pass"});
    for (const auto& r : rows) {
      w.write({r.tau, r.theta, r.riccati, r.mc_mean, r.mc_std_error,
               static_cast<std::int64_t>(r.pass ? 1 : 0)});
    }
    sink.close();
  }
}

void run_verify_all(const CommandOptions& options, std::ostream& console, RunManifest& manifest) {
  verify::SuiteOptions suite;
  if (options.seed) suite.seed = *options.seed;
  manifest.seed = suite.seed;
  const std::string table = verify::render_table(verify::run_acceptance(suite));
  console << table;
  if (options.out) {
    Sink sink(options.out, console, manifest);
    sink.stream() << table;
    sink.close();
  }
}

}  // namespace hetbelief::cli
