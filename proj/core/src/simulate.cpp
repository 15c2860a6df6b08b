#include "hetbelief/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "hetbelief/errors.hpp"
#include "hetbelief/filtering.hpp"
#include "hetbelief/parallel.hpp"
#include "hetbelief/rng.hpp"

namespace hetbelief {
namespace {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& S) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd L = ldlt.matrixL();
  L = ldlt.transpositionsP().transpose() * L;
  return L * d.asDiagonal();
}

std::vector<std::size_t> recorded_steps(std::size_t steps, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= steps; k += stride) {
    out.push_back(k);
  }
  if (out.back() != steps) {
    out.push_back(steps);
  }
  return out;
}

Eigen::VectorXd initial_hidden(const SimConfig& cfg, const MarketParams& params,
                               const std::vector<AgentBelief>& beliefs, PathRng& rng) {
  const int m = params.n - 1;
  HiddenInit mode = cfg.hidden_init;
  if (mode == HiddenInit::Default) {
    mode = cfg.truth_agent ? HiddenInit::Stationary : HiddenInit::Zero;
  }
  Eigen::VectorXd xi(m);
  switch (mode) {
    case HiddenInit::Zero:
      return Eigen::VectorXd::Zero(m);
    case HiddenInit::Fixed:
      return cfg.hidden0;
    case HiddenInit::Stationary: {
      // Stationary law N(0, S) with B S + S B' = I, conditioned on x0.
      const Eigen::MatrixXd& B = beliefs[static_cast<std::size_t>(*cfg.truth_agent)].B;
      const Eigen::MatrixXd S =
          lyapunov_solve(B, Eigen::MatrixXd::Identity(params.n, params.n));
      const Eigen::VectorXd s_h1 = S.block(1, 0, m, 1);
      const Eigen::VectorXd mean = s_h1 * (cfg.x0 / S(0, 0));
      const Eigen::MatrixXd cov =
          S.block(1, 1, m, m) - s_h1 * s_h1.transpose() / S(0, 0);
      for (int i = 0; i < m; ++i) xi(i) = rng.normal();
      return mean + cholesky_factor(0.5 * (cov + cov.transpose())) * xi;
    }
    case HiddenInit::Posterior: {
      int agent = cfg.posterior_agent;
      if (agent < 0) agent = cfg.truth_agent.value_or(0);
      const auto& belief = beliefs[static_cast<std::size_t>(agent)];
      for (int i = 0; i < m; ++i) xi(i) = rng.normal();
      return belief.xhat0 + cholesky_factor(belief.stationary_cov()) * xi;
    }
    case HiddenInit::Default:
      break;
  }
  return Eigen::VectorXd::Zero(m);
}

}  // namespace

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

void SimConfig::validate(const MarketParams& params) const {
  if (!(dt > 0.0)) throw ValidationError("simulation: dt must be > 0");
  if (!(t_end >= dt)) throw ValidationError("simulation: t_end must be >= dt");
  if (n_paths < 1) throw ValidationError("simulation: n_paths must be >= 1");
  if (record_stride < 1) throw ValidationError("simulation: record_stride must be >= 1");
  if (truth_agent && (*truth_agent < 0 || *truth_agent >= params.J)) {
    throw ValidationError("simulation: truth agent " + std::to_string(*truth_agent) +
                          " does not exist");
  }
  if (hidden_init == HiddenInit::Stationary && !truth_agent) {
    throw ValidationError("simulation: stationary initial law needs an OU truth measure");
  }
  if (hidden_init == HiddenInit::Fixed && hidden0.size() != params.n - 1) {
    throw ValidationError("simulation: hidden0 must have length n-1");
  }
  if (posterior_agent >= params.J) {
    throw ValidationError("simulation: posterior agent does not exist");
  }
}

PathBundle simulate_path(const SimConfig& cfg, const MarketParams& params,
                         const std::vector<AgentBelief>& beliefs, std::size_t path_index) {
  const int n = params.n;
  const int m = n - 1;
  const auto J = beliefs.size();
  const std::size_t steps = cfg.steps();
  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  const auto record = recorded_steps(steps, cfg.record_stride);
  const std::size_t rows = record.size();

  std::vector<SteadyStateFilter> filters;
  filters.reserve(J);
  for (const auto& b : beliefs) {
    filters.push_back(SteadyStateFilter::from(b.decomp, b.stationary_cov()));
  }

  PathRng rng(cfg.seed, path_index);

  PathBundle out;
  out.seed = cfg.seed;
  out.path_index = path_index;
  out.times.resize(rows);
  out.x.resize(rows);
  out.dividends.resize(rows);
  out.hidden.resize(static_cast<Eigen::Index>(rows), m);
  out.xhat.assign(J, Eigen::MatrixXd(static_cast<Eigen::Index>(rows), m));
  out.innovation.assign(J, std::vector<double>(rows));
  out.log_lambda_hat.assign(J, std::vector<double>(rows));
  out.log_lambda.assign(J, std::vector<double>(rows));

  Eigen::VectorXd X(n);
  X(0) = cfg.x0;
  X.tail(m) = initial_hidden(cfg, params, beliefs, rng);

  std::vector<Eigen::VectorXd> xhat(J);
  std::vector<double> N(J, 0.0), log_lam_hat(J, 0.0), log_lam(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) xhat[j] = beliefs[j].xhat0;

  const Eigen::MatrixXd* truth_B =
      cfg.truth_agent ? &beliefs[static_cast<std::size_t>(*cfg.truth_agent)].B : nullptr;

  Eigen::VectorXd dW(n), dX(n), BX(n), dxhat(m);
  std::size_t next_record = 0;
  const auto store = [&](std::size_t k) {
    const auto r = static_cast<Eigen::Index>(next_record);
    out.times[next_record] = static_cast<double>(k) * dt;
    out.x[next_record] = X(0);
    out.dividends[next_record] = params.a0 + params.sigma * X(0);
    out.hidden.row(r) = X.tail(m).transpose();
    for (std::size_t j = 0; j < J; ++j) {
      out.xhat[j].row(r) = xhat[j].transpose();
      out.innovation[j][next_record] = N[j];
      out.log_lambda_hat[j][next_record] = log_lam_hat[j];
      out.log_lambda[j][next_record] = log_lam[j];
    }
    ++next_record;
  };

  store(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (int i = 0; i < n; ++i) dW(i) = sqrt_dt * rng.normal();
    if (truth_B) {
      dX.noalias() = -(*truth_B) * X * dt;
      dX += dW;
    } else {
      dX = dW;
    }
    const double x = X(0);
    const double dx = dX(0);
    for (std::size_t j = 0; j < J; ++j) {
      const auto& d = beliefs[j].decomp;
      const double h = d.b11 * x + d.C.dot(xhat[j]);
      N[j] += dx + h * dt;
      log_lam_hat[j] += -h * dx - 0.5 * h * h * dt;
      BX.noalias() = beliefs[j].B * X;
      log_lam[j] += -BX.dot(dX) - 0.5 * BX.squaredNorm() * dt;
      const auto& f = filters[j];
      dxhat.noalias() = f.drift_xhat * xhat[j];
      xhat[j] += (f.drift_x * x + dxhat) * dt + f.gain * dx;
    }
    X += dX;
    if (next_record < rows && record[next_record] == k) store(k);
  }
  return out;
}

void simulate_truth(const SimConfig& cfg, const MarketParams& params,
                    const std::vector<AgentBelief>& beliefs,
                    const std::function<void(const PathBundle&)>& sink) {
  cfg.validate(params);
  constexpr std::size_t kBlock = 256;
  for (std::size_t begin = 0; begin < cfg.n_paths; begin += kBlock) {
    const std::size_t count = std::min(kBlock, cfg.n_paths - begin);
    std::vector<PathBundle> block(count);
    parallel_for(count, [&](std::size_t i) {
      block[i] = simulate_path(cfg, params, beliefs, begin + i);
    });
    for (const auto& bundle : block) sink(bundle);
  }
}

std::vector<double> lambda_hat_path(const PathBundle& bundle, std::size_t agent,
                                    const AgentBelief& belief) {
  const auto& d = belief.decomp;
  const auto& xhat = bundle.xhat.at(agent);
  std::vector<double> out(bundle.x.size(), 0.0);
  for (std::size_t k = 1; k < out.size(); ++k) {
    const double dt = bundle.times[k] - bundle.times[k - 1];
    const double dx = bundle.x[k] - bundle.x[k - 1];
    const Eigen::VectorXd prev = xhat.row(static_cast<Eigen::Index>(k - 1)).transpose();
    const double h = d.b11 * bundle.x[k - 1] + d.C.dot(prev);
    out[k] = out[k - 1] - h * dx - 0.5 * h * h * dt;
  }
  return out;
}

void PathSummary::add(const PathBundle& b) {
  const std::size_t J = b.xhat.size();
  const auto m = b.hidden.cols();
  std::vector<std::vector<double>> series;
  if (count_ == 0) {
    times_ = b.times;
    names_ = {"x", "delta"};
    for (std::size_t j = 0; j < J; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        names_.push_back("xhat_" + std::to_string(j) + "_" + std::to_string(k));
      }
      names_.push_back("N_" + std::to_string(j));
      names_.push_back("loglamhat_" + std::to_string(j));
    }
    sum_.assign(times_.size(), std::vector<double>(names_.size(), 0.0));
    sum_sq_ = sum_;
  } else if (b.times.size() != times_.size()) {
    throw ValidationError("PathSummary: bundles have different grids");
  }
  for (std::size_t t = 0; t < times_.size(); ++t) {
    std::size_t c = 0;
    const auto push = [&](double v) {
      sum_[t][c] += v;
      sum_sq_[t][c] += v * v;
      ++c;
    };
    push(b.x[t]);
    push(b.dividends[t]);
    for (std::size_t j = 0; j < J; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) push(b.xhat[j](static_cast<Eigen::Index>(t), k));
      push(b.innovation[j][t]);
      push(b.log_lambda_hat[j][t]);
    }
  }
  ++count_;
}

std::vector<std::string> PathSummary::columns() const {
  std::vector<std::string> out{"t"};
  for (const auto& name : names_) {
    out.push_back(name + "_mean");
    out.push_back(name + "_var");
  }
  return out;
}

std::vector<std::vector<double>> PathSummary::rows() const {
  std::vector<std::vector<double>> out;
  const double n = static_cast<double>(count_);
  for (std::size_t t = 0; t < times_.size(); ++t) {
    std::vector<double> row{times_[t]};
    for (std::size_t c = 0; c < names_.size(); ++c) {
      const double mean = sum_[t][c] / n;
      const double var = count_ > 1 ? (sum_sq_[t][c] - n * mean * mean) / (n - 1.0) : 0.0;
      row.push_back(mean);
      row.push_back(var);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace hetbelief
