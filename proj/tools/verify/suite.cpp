#include "verify/suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "hetbelief/economy.hpp"
#include "hetbelief/errors.hpp"
#include "hetbelief/filtering.hpp"
#include "hetbelief/parallel.hpp"
#include "hetbelief/pricing.hpp"
#include "hetbelief/rng.hpp"
#include "hetbelief/simulate.hpp"
#include "verify/economies.hpp"

namespace hetbelief::verify {
namespace {

struct MeanError {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanError mean_and_error(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::uint64_t criterion_seed(const SuiteOptions& o, int id) {
  return splitmix64(o.seed * 1000003ULL + static_cast<std::uint64_t>(id));
}

CriterionResult riskless_rate_limit(const SuiteOptions&) {
  double worst = 0.0;
  for (double rho : {0.02, 0.05, 0.1}) {
    for (double sigma : {0.1, 0.3}) {
      auto eco = single_agent_economy();
      eco.params.rho = rho;
      eco.params.sigma = sigma;
      const auto coeffs = assemble_economy(eco.params, eco.agents);
      const StackedState zero{Eigen::VectorXd::Zero(coeffs.dim())};
      const double r = riskless_rate(zero, coeffs, eco.params);
      const double expected = rho - 0.5 * coeffs.Gamma * sigma * sigma;
      worst = std::max(worst, std::abs(r - expected));
    }
  }
  return {1, "riskless rate at Zbar = 0 equals rho - Gamma sigma^2 / 2 (Gamma = 1)",
          worst <= 1e-15, fmt::format("max |diff| = {:.3e}", worst)};
}

CriterionResult scalar_stationary(const SuiteOptions&) {
  double worst = 0.0;
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double c : {0.5, 1.0, 2.0}) {
      Eigen::MatrixXd B(2, 2);
      B << 1.0, c, 0.3, beta;
      const Eigen::MatrixXd V = stationary_covariance(decompose_belief(B));
      const double expected = (-beta + std::sqrt(beta * beta + c * c)) / (c * c);
      worst = std::max(worst, std::abs(V(0, 0) - expected));
    }
  }
  return {2, "scalar hidden state: Vtilde = (-beta + sqrt(beta^2 + c^2)) / c^2", worst < 1e-10,
          fmt::format("max |diff| = {:.3e} over 9 (beta, c) pairs", worst)};
}

CriterionResult lyapunov_limit(const SuiteOptions&) {
  const std::vector<double> lambdas{0.5, 1.0, 1.7, 2.5};
  double worst = 0.0;
  for (int m = 1; m <= 4; ++m) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + 1, m + 1);
    B(0, 0) = 0.8;
    for (int i = 0; i < m; ++i) {
      B(i + 1, 0) = 0.1 * (i + 1);
      B(i + 1, i + 1) = lambdas[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd V = stationary_covariance(decompose_belief(B));
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) expected(i, i) = 1.0 / (2.0 * lambdas[static_cast<std::size_t>(i)]);
    worst = std::max(worst, (V - expected).cwiseAbs().maxCoeff());
  }
  return {3, "C = 0: Vtilde = diag(1 / (2 lambda)), n - 1 <= 4", worst < 1e-10,
          fmt::format("max |diff| = {:.3e}", worst)};
}

CriterionResult stationary_residuals(const SuiteOptions& o) {
  const std::uint64_t seed = criterion_seed(o, 4);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 4;
    const auto d = decompose_belief(random_stable_belief(n, seed + static_cast<std::uint64_t>(k)));
    worst = std::max(worst, stationary_residual(d, stationary_covariance(d)));
  }
  return {4, "stationary residual < 1e-10 for 20 random economies, n <= 5", worst < 1e-10,
          fmt::format("max residual = {:.3e}", worst)};
}

CriterionResult filter_calibration(const SuiteOptions& o) {
  const auto eco = single_agent_economy();
  SimConfig cfg;
  cfg.truth_agent = 0;
  cfg.t_end = 2.0;
  cfg.dt = 1e-3;
  cfg.n_paths = 10000;
  cfg.seed = criterion_seed(o, 5);
  cfg.hidden_init = HiddenInit::Posterior;
  cfg.record_stride = cfg.steps();
  std::vector<double> err(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    const auto b = simulate_path(cfg, eco.params, eco.agents, p);
    err[p] = b.hidden(1, 0) - b.xhat[0](1, 0);
  });
  const auto [mean, se] = mean_and_error(err);
  double ss = 0.0;
  for (double e : err) ss += (e - mean) * (e - mean);
  const double var = ss / static_cast<double>(err.size() - 1);
  const double target = eco.agents[0].stationary_cov()(0, 0);
  const double rel = std::abs(var - target) / target;
  const bool pass = rel < 0.05 && std::abs(mean) < 3.0 * se;
  return {5, "filter error covariance matches Vtilde (5%), mean error within 3 SE", pass,
          fmt::format("var {:.6f} vs Vtilde {:.6f} (rel {:.4f}); mean {:.2e}, SE {:.2e}", var,
                      target, rel, mean, se)};
}

CriterionResult lambda_hat_martingale(const SuiteOptions& o) {
  const auto eco = single_agent_economy();
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 1e-3;
  cfg.n_paths = 100000;
  cfg.seed = criterion_seed(o, 6);
  cfg.hidden_init = HiddenInit::Posterior;
  cfg.posterior_agent = 0;
  cfg.record_stride = cfg.steps();
  std::vector<double> lam_hat(cfg.n_paths), diff(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    const auto b = simulate_path(cfg, eco.params, eco.agents, p);
    const double lh = std::exp(b.log_lambda_hat[0][1]);
    const double l = std::exp(b.log_lambda[0][1]);
    lam_hat[p] = lh;
    diff[p] = (lh - l) * b.x[1];
  });
  const auto m = mean_and_error(lam_hat);
  const auto d = mean_and_error(diff);
  const bool pass = std::abs(m.mean - 1.0) < 3.0 * m.std_error && std::abs(d.mean) < 3.0 * d.std_error;
  return {6, "E0[Lambda-hat_1] = 1 and E0[Lambda-hat_1 x_1] = E0[Lambda_1 x_1] within 3 SE", pass,
          fmt::format("mean {:.5f} (SE {:.1e}); paired diff {:.2e} (SE {:.1e})", m.mean,
                      m.std_error, d.mean, d.std_error)};
}

CriterionResult stacked_equivalence(const SuiteOptions& o) {
  const std::uint64_t seed = criterion_seed(o, 7);
  double worst = 0.0;
  int cases = 0;
  for (int J = 1; J <= 4; ++J) {
    for (int n = 2; n <= 4; ++n) {
      std::vector<AgentBelief> agents;
      PathRng rng(seed, static_cast<std::uint64_t>(10 * J + n));
      for (int j = 0; j < J; ++j) {
        auto belief = AgentBelief::from_matrix(
            random_stable_belief(n, seed + static_cast<std::uint64_t>(100 * J + 10 * n + j)),
            0.5 + rng.uniform());
        belief.xhat0 = Eigen::VectorXd::NullaryExpr(n - 1, [&] { return rng.normal(); });
        agents.push_back(std::move(belief));
      }
      attach_stationary_covariances(agents);
      const MarketParams params{.n = n, .J = J, .rho = 0.05, .a0 = 1.0, .sigma = 0.2};
      const auto coeffs = assemble_economy(params, agents);

      const double dt = 1e-2;
      double x = rng.normal();
      std::vector<FilterState> filters;
      std::vector<Eigen::VectorXd> xhats;
      for (int j = 0; j < J; ++j) {
        filters.push_back({agents[static_cast<std::size_t>(j)].xhat0, j, 0.0});
        xhats.push_back(filters.back().xhat);
      }
      StackedState z = stack_state(x, xhats);
      for (int step = 0; step < 200; ++step) {
        const double dx = std::sqrt(dt) * rng.normal();
        z = stacked_step(z, dx, dt, coeffs);
        for (int j = 0; j < J; ++j) {
          const auto& a = agents[static_cast<std::size_t>(j)];
          auto& f = filters[static_cast<std::size_t>(j)];
          f = filter_step(f, x, dx, dt, a.decomp, a.stationary_cov());
          xhats[static_cast<std::size_t>(j)] = f.xhat;
        }
        x += dx;
        worst = std::max(worst, (z.z - stack_state(x, xhats).z).cwiseAbs().maxCoeff());
      }
      ++cases;
    }
  }
  return {7, "stacked dynamics equal concatenated per-agent filters (1e-12 per step)",
          worst <= 1e-12, fmt::format("max |diff| = {:.3e} over {} economies x 200 steps", worst, cases)};
}

CriterionResult riccati_vs_mc(const SuiteOptions& o) {
  const std::vector<double> taus{0.25, 0.5, 1.0};
  const std::vector<double> thetas{0.0, 0.3};
  bool pass = true;
  double worst = 0.0;
  int economy_index = 0;
  for (const auto& eco : {single_agent_economy(), two_agent_economy()}) {
    const auto coeffs = assemble_economy(eco.params, eco.agents);
    Eigen::VectorXd zbar(coeffs.dim());
    zbar(0) = 0.3;
    for (Eigen::Index i = 1; i < zbar.size(); ++i) zbar(i) = (i % 2 ? -0.2 : 0.1);
    McOptions mc{.n_paths = 100000,
                 .seed = criterion_seed(o, 8) + static_cast<std::uint64_t>(economy_index++),
                 .dt = 1e-3};
    for (const auto& row : compare_vt(coeffs, eco.params, zbar, taus, thetas, mc)) {
      pass = pass && row.pass;
      worst = std::max(worst, std::abs(row.riccati - row.mc_mean) / row.mc_std_error);
    }
  }
  return {8, "eval_VT agrees with the Monte Carlo oracle within 3 SE (J = 1 and J = 2)", pass,
          fmt::format("worst |diff| / SE = {:.2f} over 12 cells", worst)};
}

CriterionResult decoupled_price(const SuiteOptions&) {
  const double rho = 0.02, a0 = 1.0, sigma = 0.1, gamma = 1.0, x = 0.0;
  const auto eco = decoupled_economy(rho, a0, sigma, gamma);
  const auto coeffs = assemble_economy(eco.params, eco.agents);
  const PriceOptions price;
  const double T_max = price.horizon(eco.params);
  const auto sol = solve_riccati(coeffs, eco.params, {.tau_max = T_max, .dtau = 1e-3});
  Eigen::VectorXd zbar = Eigen::VectorXd::Zero(coeffs.dim());
  zbar(0) = x;
  const auto quote = stock_price(sol, zbar, eco.params, price);
  const double shifted = rho - 0.5 * coeffs.Gamma * coeffs.Gamma * sigma * sigma;
  const double exact = (a0 + sigma * x) / shifted - coeffs.Gamma * sigma * sigma / (shifted * shifted);
  const double rel = std::abs(quote.S - exact) / exact;
  return {9, "decoupled price equals the closed form 22.2222 within 0.1%", rel < 1e-3,
          fmt::format("S = {:.6f}, closed form {:.6f}, rel {:.2e}", quote.S, exact, rel)};
}

CriterionResult coupled_price(const SuiteOptions& o) {
  const auto eco = single_agent_economy();
  const auto coeffs = assemble_economy(eco.params, eco.agents);
  const PriceOptions price;
  const double T_max = price.horizon(eco.params);
  const auto sol = solve_riccati(coeffs, eco.params, {.tau_max = T_max, .dtau = 1e-3});
  Eigen::VectorXd zbar(coeffs.dim());
  zbar << 0.3, -0.2;
  const auto quote = stock_price(sol, zbar, eco.params, price);
  const auto mc = mc_price_oracle(coeffs, eco.params, zbar, T_max,
                                  {.n_paths = 20000, .seed = criterion_seed(o, 10), .dt = 1e-2});
  const double z = std::abs(quote.S - mc.S) / mc.std_error;
  return {10, "quadrature price agrees with the discounted-dividend Monte Carlo price within 3 SE",
          z < 3.0,
          fmt::format("S = {:.5f}, MC {:.5f} (SE {:.5f}), |diff| / SE = {:.2f}", quote.S, mc.S,
                      mc.std_error, z)};
}

CriterionResult theta_sensitivity(const SuiteOptions&) {
  const double h = 1e-5;
  double worst = 0.0;
  const auto check = [&](const TestEconomy& eco, const Eigen::VectorXd& zbar) {
    const auto coeffs = assemble_economy(eco.params, eco.agents);
    const RiccatiOptions base{.tau_max = 1.0, .dtau = 1e-3};
    auto plus = base, minus = base;
    plus.theta = h;
    minus.theta = -h;
    const auto sol0 = solve_riccati(coeffs, eco.params, base);
    const auto sol_p = solve_riccati(coeffs, eco.params, plus);
    const auto sol_m = solve_riccati(coeffs, eco.params, minus);
    for (double tau : {0.25, 0.5, 1.0}) {
      const double fd = (eval_VT(sol_p, tau, zbar, h) - eval_VT(sol_m, tau, zbar, -h)) / (2.0 * h);
      const double ode = eval_dVT_dtheta(sol0, tau, zbar, 0.0);
      worst = std::max(worst, std::abs(fd - ode) / std::abs(ode));
    }
  };
  const auto decoupled = decoupled_economy(0.02, 1.0, 0.1, 1.0);
  check(decoupled, Eigen::Vector2d(0.4, 0.0));
  check(single_agent_economy(), Eigen::Vector2d(0.3, -0.2));
  check(two_agent_economy(), Eigen::Vector3d(0.3, -0.2, 0.1));
  return {11, "sensitivity-ODE theta-derivative matches central differences (rel < 1e-6)",
          worst < 1e-6, fmt::format("max rel error = {:.3e}", worst)};
}

CriterionResult gaussian_third_moment(const SuiteOptions& o) {
  const std::size_t draws = 1000000;
  Eigen::Vector3d m(0.5, -0.3, 1.0);
  Eigen::Matrix3d S;
  S << 1.0, 0.3, -0.2, 0.3, 0.8, 0.1, -0.2, 0.1, 0.5;
  const Eigen::Matrix3d L = S.llt().matrixL();
  const std::uint64_t seed = criterion_seed(o, 12);
  constexpr std::size_t kBlocks = 100;
  std::vector<Eigen::Vector3d> draws_x(draws);
  parallel_for(kBlocks, [&](std::size_t blk) {
    PathRng rng(seed, blk);
    for (std::size_t i = blk * (draws / kBlocks); i < (blk + 1) * (draws / kBlocks); ++i) {
      const Eigen::Vector3d xi(rng.normal(), rng.normal(), rng.normal());
      draws_x[i] = m + L * xi;
    }
  });
  bool pass = true;
  double worst = 0.0;
  std::vector<double> prod(draws);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      for (int k = j; k < 3; ++k) {
        for (std::size_t d = 0; d < draws; ++d) prod[d] = draws_x[d](i) * draws_x[d](j) * draws_x[d](k);
        const auto est = mean_and_error(prod);
        const double expected = m(i) * S(j, k) + m(j) * S(i, k) + m(k) * S(i, j) + m(i) * m(j) * m(k);
        const double z = std::abs(est.mean - expected) / est.std_error;
        worst = std::max(worst, z);
        pass = pass && z < 3.0;
      }
    }
  }
  return {12, "Gaussian third moments match m_i S_jk + m_j S_ik + m_k S_ij + m_i m_j m_k", pass,
          fmt::format("worst |diff| / SE = {:.2f} over 10 index triples, 1e6 draws", worst)};
}

using Criterion = std::function<CriterionResult(const SuiteOptions&)>;

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      riskless_rate_limit, scalar_stationary,   lyapunov_limit,       stationary_residuals,
      filter_calibration,  lambda_hat_martingale, stacked_equivalence, riccati_vs_mc,
      decoupled_price,     coupled_price,       theta_sensitivity,    gaussian_third_moment,
  };
  return all;
}

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  const auto& all = criteria();
  if (id < 1 || id > static_cast<int>(all.size())) {
    throw ValidationError("no acceptance criterion " + std::to_string(id));
  }
  try {
    return all[static_cast<std::size_t>(id - 1)](options);
  } catch (const std::exception& e) {
    return {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
  }
}

std::vector<CriterionResult> run_acceptance(const SuiteOptions& options) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= static_cast<int>(criteria().size()); ++id) {
    out.push_back(run_criterion(id, options));
  }
  return out;
}

std::string render_table(const std::vector<CriterionResult>& results) {
  std::string out;
  int passed = 0;
  for (const auto& r : results) {
    passed += r.pass ? 1 : 0;
    out += fmt::format("{} {:>2}  {}  [{}]\n", r.pass ? "PASS" : "FAIL", r.id, r.name, r.detail);
  }
  out += fmt::format("{}/{} criteria passed\n", passed, results.size());
  return out;
}

std::vector<VtComparison> compare_vt(const EconomyCoefficients& coeffs, const MarketParams& params,
                                     const Eigen::VectorXd& zbar, const std::vector<double>& taus,
                                     const std::vector<double>& thetas, const McOptions& mc,
                                     double dtau) {
  const double tau_max = *std::max_element(taus.begin(), taus.end());
  const auto sol = solve_riccati(coeffs, params, {.tau_max = tau_max, .dtau = dtau});
  const auto est = mc_oracle_VT_grid(coeffs, params, taus, zbar, thetas, mc);
  std::vector<VtComparison> rows;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      VtComparison row{taus[i], thetas[j], eval_VT(sol, taus[i], zbar, thetas[j]), est[i][j].mean,
                       est[i][j].std_error, false};
      row.pass = std::abs(row.riccati - row.mc_mean) < 3.0 * row.mc_std_error ||
                 (row.mc_std_error == 0.0 && std::abs(row.riccati - row.mc_mean) <= 1e-12 * std::abs(row.riccati));
      rows.push_back(row);
    }
  }
  return rows;
}

std::string render_vt_table(const std::vector<VtComparison>& rows) {
  std::string out = fmt::format("{:>6} {:>6} {:>14} {:>14} {:>11} {:>7}  result\n", "tau",
                                "theta", "riccati", "mc_mean", "mc_se", "z");
  for (const auto& r : rows) {
    const double z = r.mc_std_error > 0.0 ? std::abs(r.riccati - r.mc_mean) / r.mc_std_error : 0.0;
    out += fmt::format("{:>6.3f} {:>6.3f} {:>14.8f} {:>14.8f} {:>11.3e} {:>7.2f}  {}\n", r.tau,
                       r.theta, r.riccati, r.mc_mean, r.mc_std_error, z, r.pass ? "PASS" : "FAIL");
  }
  return out;
}

}  // namespace hetbelief::verify
