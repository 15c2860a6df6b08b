#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetbelief/economy.hpp"
#include "hetbelief/pricing.hpp"

namespace hetbelief::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 7;
};

/// Acceptance criteria 1-12, in order. Deterministic for a given seed and
/// independent of the worker count.
std::vector<CriterionResult> run_acceptance(const SuiteOptions& options);

/// Runs one criterion by id (1-12).
CriterionResult run_criterion(int id, const SuiteOptions& options);

/// "PASS  1  name  detail" lines plus a summary line.
std::string render_table(const std::vector<CriterionResult>& results);

struct VtComparison {
  double tau = 0.0;
  double theta = 0.0;
  double riccati = 0.0;
  double mc_mean = 0.0;
  double mc_std_error = 0.0;
  bool pass = false;  // |riccati - mc| < 3 standard errors
};

/// Solves the Riccati system to max(taus) and compares eval_VT with the
/// Monte Carlo oracle at every (tau, theta).
std::vector<VtComparison> compare_vt(const EconomyCoefficients& coeffs, const MarketParams& params,
                                     const Eigen::VectorXd& zbar, const std::vector<double>& taus,
                                     const std::vector<double>& thetas, const McOptions& mc,
                                     double dtau = 1e-3);

std::string render_vt_table(const std::vector<VtComparison>& rows);

}  // namespace hetbelief::verify
