#include "hetbelief/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hetbelief/errors.hpp"
#include "hetbelief/parallel.hpp"
#include "hetbelief/quadrature.hpp"
#include "hetbelief/rng.hpp"

namespace hetbelief {
namespace {

// State layout: [vec(a) (d*d) | b (d) | db (d) | c | dc | d2c].
class RiccatiSystem {
 public:
  RiccatiSystem(const EconomyCoefficients& coeffs, const MarketParams& params)
      : d_(coeffs.dim()),
        B_(coeffs.B_bar),
        Q_(coeffs.Q_bar),
        alpha_(coeffs.alpha_bar),
        s_(coeffs.Gamma / coeffs.J),
        gs_(coeffs.Gamma * params.sigma),
        u_(d_),
        w_(d_),
        aB_(d_, d_) {
    K0_ = -s_ * coeffs.beta_bar + s_ * s_ * alpha_ * alpha_.transpose();
  }

  Eigen::Index size() const { return d_ * d_ + 2 * d_ + 3; }
  Eigen::Index dim() const { return d_; }

  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::Map<const Eigen::MatrixXd> a(y.data(), d_, d_);
    const auto b = y.segment(d_ * d_, d_);
    const auto db = y.segment(d_ * d_ + d_, d_);
    const Eigen::Index tail = d_ * d_ + 2 * d_;

    u_.noalias() = a * Q_;  // a symmetric, so Q'a = u'
    w_ = u_ + s_ * alpha_;
    aB_.noalias() = a * B_;

    Eigen::Map<Eigen::MatrixXd> da(dy.data(), d_, d_);
    da = aB_ + aB_.transpose() + K0_;
    da.noalias() += s_ * (u_ * alpha_.transpose() + alpha_ * u_.transpose());
    da.noalias() += u_ * u_.transpose();

    const double bQ = b.dot(Q_);
    const double dbQ = db.dot(Q_);
    // b M with M = B + Q (u + s alpha)'
    dy.segment(d_ * d_, d_).noalias() = B_.transpose() * b;
    dy.segment(d_ * d_, d_) += bQ * w_ - (s_ * gs_) * alpha_ - gs_ * u_;
    dy.segment(d_ * d_ + d_, d_).noalias() = B_.transpose() * db;
    dy.segment(d_ * d_ + d_, d_) += dbQ * w_;

    dy(tail) = 0.5 * Q_.dot(u_) + 0.5 * bQ * bQ + 0.5 * gs_ * gs_ - gs_ * bQ;
    dy(tail + 1) = bQ * dbQ - gs_ * dbQ;
    dy(tail + 2) = dbQ * dbQ;
  }

  void rk4(const Eigen::VectorXd& y, double h, Eigen::VectorXd& out) {
    k1_.resize(size());
    k2_.resize(size());
    k3_.resize(size());
    k4_.resize(size());
    rhs(y, k1_);
    tmp_ = y + 0.5 * h * k1_;
    rhs(tmp_, k2_);
    tmp_ = y + 0.5 * h * k2_;
    rhs(tmp_, k3_);
    tmp_ = y + h * k3_;
    rhs(tmp_, k4_);
    out = y + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    symmetrize(out);
  }

  void symmetrize(Eigen::VectorXd& y) const {
    Eigen::Map<Eigen::MatrixXd> a(y.data(), d_, d_);
    for (Eigen::Index i = 0; i < d_; ++i) {
      for (Eigen::Index j = i + 1; j < d_; ++j) {
        const double avg = 0.5 * (a(i, j) + a(j, i));
        a(i, j) = avg;
        a(j, i) = avg;
      }
    }
  }

 private:
  Eigen::Index d_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd Q_;
  Eigen::VectorXd alpha_;
  double s_;   // Gamma / J
  double gs_;  // Gamma * sigma
  Eigen::MatrixXd K0_;
  Eigen::VectorXd u_, w_;
  Eigen::MatrixXd aB_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, tmp_;
};

struct Interp {
  std::size_t k = 0;
  double w = 0.0;  // weight of node k + 1
};

Interp locate(const RiccatiSolution& sol, double tau) {
  if (tau < 0.0 || tau > sol.tau_max() * (1.0 + 1e-12) + 1e-12) {
    throw ValidationError("tau " + std::to_string(tau) + " outside the solved range [0, " +
                          std::to_string(sol.tau_max()) + "]");
  }
  const double pos = tau / sol.dtau;
  auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= sol.size()) {
    return {sol.size() - 1, 0.0};
  }
  double w = pos - static_cast<double>(k);
  if (w < 1e-9) w = 0.0;
  if (w > 1.0 - 1e-9) {
    ++k;
    w = 0.0;
  }
  return {k, w};
}

template <class F>
auto blend(const Interp& at, F&& get) {
  using Value = std::decay_t<decltype(get(std::size_t{0}))>;
  if (at.w == 0.0) return Value(get(at.k));
  return Value((1.0 - at.w) * get(at.k) + at.w * get(at.k + 1));
}

// Exponent of V^T and its theta-derivative at (tau, zbar, theta).
std::pair<double, double> exponent(const RiccatiSolution& sol, double tau,
                                   const Eigen::VectorXd& z, double theta) {
  if (z.size() != sol.dim) {
    throw ValidationError("zbar has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(sol.dim));
  }
  const Interp at = locate(sol, tau);
  const double delta = theta - sol.theta;
  const double quad = blend(at, [&](std::size_t k) { return double(z.dot(sol.a(k) * z)); });
  const double bz = blend(at, [&](std::size_t k) { return double(sol.b_data.col(Eigen::Index(k)).dot(z)); });
  const double dbz = blend(at, [&](std::size_t k) { return double(sol.db_data.col(Eigen::Index(k)).dot(z)); });
  const double c = blend(at, [&](std::size_t k) { return sol.c[k]; });
  const double dc = blend(at, [&](std::size_t k) { return sol.dc_dtheta[k]; });
  const double d2c = blend(at, [&](std::size_t k) { return sol.d2c_dtheta2[k]; });
  const double value = 0.5 * quad + bz + delta * dbz + c + delta * dc + 0.5 * delta * delta * d2c;
  const double slope = dbz + dc + delta * d2c;
  return {value, slope};
}

double sample_std_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Zbar and the theta-free part of the V^T exponent along one P0 path.
class OraclePath {
 public:
  OraclePath(const EconomyCoefficients& c, const MarketParams& p, const Eigen::VectorXd& zbar)
      : c_(c), s_(c.Gamma / c.J), gs_(c.Gamma * p.sigma), z_(zbar), drift_(zbar.size()),
        beta_z_(zbar.size()) {}

  void step(double dx, double dt) {
    beta_z_.noalias() = c_.beta_bar * z_;
    log_weight_ += -gs_ * dx + s_ * (c_.alpha_bar.dot(z_) * dx - 0.5 * z_.dot(beta_z_) * dt);
    drift_.noalias() = c_.B_bar * z_;
    const double x_next = z_(0) + dx;
    z_ += drift_ * dt + c_.Q_bar * dx;
    z_(0) = x_next;
  }

  double x() const { return z_(0); }
  double log_weight() const { return log_weight_; }

 private:
  const EconomyCoefficients& c_;
  double s_;
  double gs_;
  Eigen::VectorXd z_;
  Eigen::VectorXd drift_, beta_z_;
  double log_weight_ = 0.0;
};

}  // namespace

RiccatiRates ode_rhs(const Eigen::MatrixXd& a, const Eigen::RowVectorXd& b, double c,
                     const EconomyCoefficients& coeffs, const MarketParams& params) {
  (void)c;  // the system is autonomous in c
  RiccatiSystem sys(coeffs, params);
  const Eigen::Index d = sys.dim();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(sys.size());
  y.head(d * d) = Eigen::Map<const Eigen::VectorXd>(a.data(), d * d);
  y.segment(d * d, d) = b.transpose();
  Eigen::VectorXd dy(sys.size());
  sys.rhs(y, dy);
  return {Eigen::Map<const Eigen::MatrixXd>(dy.data(), d, d), dy.segment(d * d, d).transpose(),
          dy(d * d + 2 * d)};
}

Eigen::MatrixXd raw_a_rhs(const Eigen::MatrixXd& a, const EconomyCoefficients& c) {
  const double s = c.Gamma / c.J;
  return 2.0 * a * c.B_bar - s * c.beta_bar + a * c.Q_bar * c.Q_bar.transpose() * a +
         s * s * c.alpha_bar * c.alpha_bar.transpose() +
         2.0 * s * a * c.Q_bar * c.alpha_bar.transpose();
}

RiccatiSolution solve_riccati(const EconomyCoefficients& coeffs, const MarketParams& params,
                              const RiccatiOptions& opt) {
  if (!(opt.tau_max > 0.0)) throw ValidationError("solve_riccati: tau_max must be > 0");
  if (!(opt.dtau > 0.0)) throw ValidationError("solve_riccati: dtau must be > 0");

  RiccatiSystem sys(coeffs, params);
  const Eigen::Index d = sys.dim();
  const auto steps = static_cast<std::size_t>(std::ceil(opt.tau_max / opt.dtau - 1e-9));
  const std::size_t nodes = steps + 1;

  RiccatiSolution sol;
  sol.dim = static_cast<int>(d);
  sol.dtau = opt.dtau;
  sol.theta = opt.theta;
  sol.taus.resize(nodes);
  sol.a_data.resize(d * d, static_cast<Eigen::Index>(nodes));
  sol.b_data.resize(d, static_cast<Eigen::Index>(nodes));
  sol.db_data.resize(d, static_cast<Eigen::Index>(nodes));
  sol.c.resize(nodes);
  sol.dc_dtheta.resize(nodes);
  sol.d2c_dtheta2.resize(nodes);

  // a(0) = 0, b(0) = (theta sigma, 0...), c(0) = theta a0.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(sys.size());
  y(d * d) = opt.theta * params.sigma;
  y(d * d + d) = params.sigma;
  y(d * d + 2 * d) = opt.theta * params.a0;
  y(d * d + 2 * d + 1) = params.a0;

  const auto store = [&](std::size_t k, double tau) {
    const auto col = static_cast<Eigen::Index>(k);
    sol.taus[k] = tau;
    sol.a_data.col(col) = y.head(d * d);
    sol.b_data.col(col) = y.segment(d * d, d);
    sol.db_data.col(col) = y.segment(d * d + d, d);
    sol.c[k] = y(d * d + 2 * d);
    sol.dc_dtheta[k] = y(d * d + 2 * d + 1);
    sol.d2c_dtheta2[k] = y(d * d + 2 * d + 2);
  };
  store(0, 0.0);

  Eigen::VectorXd full(sys.size()), half(sys.size()), two_half(sys.size());
  // Advances y by h, splitting the step until one full step and two half steps agree.
  const std::function<void(double, double, int)> advance = [&](double tau, double h, int depth) {
    sys.rk4(y, h, full);
    sys.rk4(y, 0.5 * h, half);
    sys.rk4(half, 0.5 * h, two_half);
    const double err =
        (two_half - full).cwiseAbs().maxCoeff() / (1.0 + two_half.cwiseAbs().maxCoeff());
    if (err <= opt.step_tol || !two_half.allFinite()) {
      y = two_half;
      return;
    }
    if (depth >= opt.max_halvings) {
      throw NumericalError("solve_riccati: step controller stalled at tau* = " +
                           std::to_string(tau) + " (local error " + std::to_string(err) + ")");
    }
    advance(tau, 0.5 * h, depth + 1);
    advance(tau + 0.5 * h, 0.5 * h, depth + 1);
  };

  for (std::size_t k = 1; k < nodes; ++k) {
    const double tau0 = static_cast<double>(k - 1) * opt.dtau;
    const double tau1 = std::min(static_cast<double>(k) * opt.dtau, std::max(opt.tau_max, tau0));
    advance(tau0, tau1 - tau0, 0);
    const double a_max = y.head(d * d).cwiseAbs().maxCoeff();
    if (!y.allFinite() || a_max > opt.blowup_bound) {
      throw NumericalError("solve_riccati: blowup, |a|_max exceeded " +
                           std::to_string(opt.blowup_bound) + " at tau* = " + std::to_string(tau1));
    }
    store(k, tau1);
  }
  return sol;
}

double eval_VT(const RiccatiSolution& sol, double tau, const Eigen::VectorXd& zbar, double theta) {
  return std::exp(exponent(sol, tau, zbar, theta).first);
}

double eval_dVT_dtheta(const RiccatiSolution& sol, double tau, const Eigen::VectorXd& zbar,
                       double theta) {
  const auto [value, slope] = exponent(sol, tau, zbar, theta);
  return slope * std::exp(value);
}

std::vector<std::vector<McEstimate>> mc_oracle_VT_grid(const EconomyCoefficients& coeffs,
                                                       const MarketParams& params,
                                                       const std::vector<double>& taus,
                                                       const Eigen::VectorXd& zbar,
                                                       const std::vector<double>& thetas,
                                                       const McOptions& opt) {
  if (opt.n_paths < 100) throw ValidationError("mc_oracle_VT: n_paths must be >= 100");
  if (!(opt.dt > 0.0)) throw ValidationError("mc_oracle_VT: dt must be > 0");
  if (zbar.size() != coeffs.dim()) throw ValidationError("mc_oracle_VT: zbar has the wrong length");
  std::vector<std::size_t> stop(taus.size());
  std::size_t steps = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (taus[i] < 0.0) throw ValidationError("mc_oracle_VT: tau must be >= 0");
    stop[i] = static_cast<std::size_t>(std::llround(taus[i] / opt.dt));
    steps = std::max(steps, stop[i]);
  }
  const std::size_t cells = taus.size() * thetas.size();
  std::vector<double> samples(opt.n_paths * cells);
  const double sqrt_dt = std::sqrt(opt.dt);

  parallel_for(opt.n_paths, [&](std::size_t p) {
    PathRng rng(opt.seed, p);
    OraclePath path(coeffs, params, zbar);
    const auto record = [&](std::size_t i) {
      for (std::size_t j = 0; j < thetas.size(); ++j) {
        samples[p * cells + i * thetas.size() + j] =
            std::exp(path.log_weight() + thetas[j] * (params.sigma * path.x() + params.a0));
      }
    };
    for (std::size_t i = 0; i < taus.size(); ++i) {
      if (stop[i] == 0) record(i);
    }
    for (std::size_t k = 1; k <= steps; ++k) {
      path.step(sqrt_dt * rng.normal(), opt.dt);
      for (std::size_t i = 0; i < taus.size(); ++i) {
        if (stop[i] == k) record(i);
      }
    }
  });

  std::vector<std::vector<McEstimate>> out(taus.size(), std::vector<McEstimate>(thetas.size()));
  std::vector<double> column(opt.n_paths);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t p = 0; p < opt.n_paths; ++p) column[p] = samples[p * cells + c];
    const double mean = mean_of(column);
    out[c / thetas.size()][c % thetas.size()] = {mean, sample_std_error(column, mean)};
  }
  return out;
}

McEstimate mc_oracle_VT(const EconomyCoefficients& coeffs, const MarketParams& params,
                        double tau, const Eigen::VectorXd& zbar, double theta,
                        const McOptions& options) {
  return mc_oracle_VT_grid(coeffs, params, {tau}, zbar, {theta}, options)[0][0];
}

PriceQuote stock_price(const RiccatiSolution& sol, const Eigen::VectorXd& zbar,
                       const MarketParams& params, const PriceOptions& opt) {
  const double T_max = opt.horizon(params);
  if (sol.tau_max() < T_max * (1.0 - 1e-12)) {
    throw ValidationError("stock_price: Riccati solution covers tau <= " +
                          std::to_string(sol.tau_max()) + " but T_max = " + std::to_string(T_max));
  }
  std::size_t intervals = opt.quad_points > 0
                              ? opt.quad_points
                              : static_cast<std::size_t>(std::llround(T_max / sol.dtau));
  intervals = std::max<std::size_t>(4, (intervals + 3) / 4 * 4);
  const double h = T_max / static_cast<double>(intervals);

  PriceQuote quote;
  quote.zbar = zbar;
  quote.T_max = T_max;
  quote.taus.resize(intervals + 1);
  quote.integrand.resize(intervals + 1);
  double peak = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double tau = std::min(static_cast<double>(i) * h, T_max);
    const double f = std::exp(-params.rho * tau) * eval_dVT_dtheta(sol, tau, zbar, 0.0);
    if (!std::isfinite(f)) {
      throw NumericalError("stock_price: integrand not finite at tau = " + std::to_string(tau));
    }
    quote.taus[i] = tau;
    quote.integrand[i] = f;
    peak = std::max(peak, std::abs(f));
  }
  const double last = quote.integrand.back();
  if (!(std::abs(last) < opt.decay_tol * peak)) {
    throw NumericalError("stock_price: integrand non-decaying at T_max = " + std::to_string(T_max) +
                         " (|f(T_max)| / max |f| = " + std::to_string(std::abs(last) / peak) +
                         "); the price may diverge, try a larger rho or T_max");
  }

  const double fine = simpson(quote.integrand, h);
  std::vector<double> coarse;
  coarse.reserve(intervals / 2 + 1);
  for (std::size_t i = 0; i <= intervals; i += 2) coarse.push_back(quote.integrand[i]);
  const double quad_error = std::abs(fine - simpson(coarse, 2.0 * h)) / 15.0;

  const std::size_t back = intervals / 10 > 0 ? intervals / 10 : 1;
  const auto tail = geometric_tail(quote.integrand[intervals - back], last,
                                   static_cast<double>(back) * h);
  quote.tail = tail.value;
  quote.S = fine + tail.value;
  quote.error_estimate = quad_error + std::abs(tail.value) +
                         (tail.decay_rate == 0.0 ? std::abs(last) * 0.1 * T_max : 0.0);
  return quote;
}

McPrice mc_price_oracle(const EconomyCoefficients& coeffs, const MarketParams& params,
                        const Eigen::VectorXd& zbar, double T_max, const McOptions& opt) {
  if (!(T_max > 0.0) || !(opt.dt > 0.0)) {
    throw ValidationError("mc_price_oracle: T_max and dt must be > 0");
  }
  const auto steps = static_cast<std::size_t>(std::llround(T_max / opt.dt));
  if (steps < 4 || steps % 4 != 0 ||
      std::abs(static_cast<double>(steps) * opt.dt - T_max) > 1e-9 * T_max) {
    throw ValidationError("mc_price_oracle: T_max / dt must be a multiple of 4");
  }
  if (zbar.size() != coeffs.dim()) throw ValidationError("mc_price_oracle: zbar has the wrong length");
  const std::size_t back = steps / 10;
  const double sqrt_dt = std::sqrt(opt.dt);

  std::vector<double> integral(opt.n_paths), f_before(opt.n_paths), f_end(opt.n_paths);
  parallel_for(opt.n_paths, [&](std::size_t p) {
    PathRng rng(opt.seed, p);
    OraclePath path(coeffs, params, zbar);
    std::vector<double> f(steps + 1);
    const auto sample = [&](std::size_t k) {
      const double tau = static_cast<double>(k) * opt.dt;
      return std::exp(path.log_weight() - params.rho * tau) * (params.a0 + params.sigma * path.x());
    };
    f[0] = sample(0);
    for (std::size_t k = 1; k <= steps; ++k) {
      path.step(sqrt_dt * rng.normal(), opt.dt);
      f[k] = sample(k);
    }
    integral[p] = simpson(f, opt.dt);
    f_before[p] = f[steps - back];
    f_end[p] = f[steps];
  });

  const double mean = mean_of(integral);
  const auto tail = geometric_tail(mean_of(f_before), mean_of(f_end),
                                   static_cast<double>(back) * opt.dt);
  return {mean + tail.value, sample_std_error(integral, mean), tail.value};
}

}  // namespace hetbelief
