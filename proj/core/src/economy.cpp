#include "hetbelief/economy.hpp"

#include <string>

#include "hetbelief/errors.hpp"

namespace hetbelief {

EconomyCoefficients assemble_economy(const MarketParams& params,
                                     const std::vector<AgentBelief>& beliefs) {
  if (beliefs.empty() || static_cast<int>(beliefs.size()) != params.J) {
    throw ValidationError("assemble_economy: agent count does not match J");
  }
  EconomyCoefficients e;
  e.n = params.n;
  e.J = params.J;
  const int m = params.n - 1;
  const int dim = e.dim();

  double inv_gamma_sum = 0.0;
  for (const auto& b : beliefs) inv_gamma_sum += 1.0 / b.gamma;
  e.Gamma = 1.0 / inv_gamma_sum;

  e.alpha_bar = Eigen::VectorXd::Zero(dim);
  e.beta_bar = Eigen::MatrixXd::Zero(dim, dim);
  e.A1 = Eigen::VectorXd::Zero(dim - 1);
  e.B1 = Eigen::MatrixXd::Zero(dim - 1, dim - 1);
  e.Q1 = Eigen::VectorXd::Zero(dim - 1);

  for (int j = 0; j < params.J; ++j) {
    const auto& belief = beliefs[static_cast<std::size_t>(j)];
    if (!belief.Vtilde) {
      throw ValidationError("assemble_economy: agent " + std::to_string(j) +
                            " has no stationary covariance");
    }
    const auto& d = belief.decomp;
    const Eigen::MatrixXd& V = *belief.Vtilde;
    const double w = 1.0 / belief.gamma;
    const int off = 1 + j * m;
    const Eigen::VectorXd VC = V * d.C;

    e.alpha_bar(0) -= d.b11 * w;
    e.alpha_bar.segment(off, m) = -d.C * w;

    e.beta_bar(0, 0) += d.b11 * d.b11 * w;
    e.beta_bar.block(0, off, 1, m) = d.b11 * w * d.C.transpose();
    e.beta_bar.block(off, 0, m, 1) = d.b11 * w * d.C;
    e.beta_bar.block(off, off, m, m) = w * d.C * d.C.transpose();

    e.A1.segment(off - 1, m) = -(d.A + VC * d.b11);
    e.Q1.segment(off - 1, m) = -VC;
    e.B1.block(off - 1, off - 1, m, m) = -(d.Btilde + VC * d.C.transpose());
  }

  e.B_bar = Eigen::MatrixXd::Zero(dim, dim);
  e.B_bar.block(1, 0, dim - 1, 1) = e.A1;
  e.B_bar.block(1, 1, dim - 1, dim - 1) = e.B1;
  e.Q_bar.resize(dim);
  e.Q_bar(0) = 1.0;
  e.Q_bar.tail(dim - 1) = e.Q1;
  return e;
}

StackedState stack_state(double x, const std::vector<Eigen::VectorXd>& xhats) {
  Eigen::Index dim = 1;
  for (const auto& v : xhats) dim += v.size();
  StackedState s{Eigen::VectorXd(dim)};
  s.z(0) = x;
  Eigen::Index off = 1;
  for (const auto& v : xhats) {
    s.z.segment(off, v.size()) = v;
    off += v.size();
  }
  return s;
}

StackedState stacked_step(const StackedState& state, double dx, double dt,
                          const EconomyCoefficients& coeffs) {
  StackedState next{state.z + coeffs.B_bar * state.z * dt + coeffs.Q_bar * dx};
  // B_bar's first row is zero, so x moves by exactly dx.
  next.z(0) = state.z(0) + dx;
  return next;
}

double log_spd_increment(const StackedState& state, double dx, double dt,
                         const EconomyCoefficients& c, const MarketParams& p) {
  const double scale = c.Gamma / c.J;
  const double linear = c.alpha_bar.dot(state.z);
  const double quad = state.z.dot(c.beta_bar * state.z);
  return -p.rho * dt - c.Gamma * p.sigma * dx + scale * (linear * dx - 0.5 * quad * dt);
}

double riskless_rate(const StackedState& state, const EconomyCoefficients& c,
                     const MarketParams& p) {
  const double quad = state.z.dot(c.beta_bar * state.z);
  const double loading = c.alpha_bar.dot(state.z) / c.J - p.sigma;
  return p.rho + c.Gamma / (2.0 * c.J) * quad - 0.5 * c.Gamma * c.Gamma * loading * loading;
}

double market_price_of_risk(const StackedState& state, const EconomyCoefficients& c,
                            const MarketParams& p) {
  return c.Gamma * p.sigma - c.Gamma / c.J * c.alpha_bar.dot(state.z);
}

}  // namespace hetbelief
