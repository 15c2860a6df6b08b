#include <benchmark/benchmark.h>

#include "hetbelief/economy.hpp"
#include "hetbelief/filtering.hpp"
#include "hetbelief/pricing.hpp"
#include "hetbelief/simulate.hpp"

using namespace hetbelief;

namespace {

struct Economy {
  MarketParams params;
  std::vector<AgentBelief> agents;
};

Economy make_economy(int J) {
  Economy e;
  e.params = {.n = 2, .J = J, .rho = 0.5, .a0 = 1.0, .sigma = 0.2};
  for (int j = 0; j < J; ++j) {
    Eigen::MatrixXd B(2, 2);
    B << 0.2 + 0.1 * j, 0.3 - 0.2 * j, 0.1, 1.0 + 0.2 * j;
    e.agents.push_back(AgentBelief::from_matrix(B, 1.0 + j));
  }
  attach_stationary_covariances(e.agents);
  return e;
}

void BM_StationaryCovariance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) * 1.5;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) B(i, j) = 0.1 * ((i * 7 + j * 3) % 5 - 2);
  const auto d = decompose_belief(B);
  for (auto _ : state) benchmark::DoNotOptimize(stationary_covariance(d));
}
BENCHMARK(BM_StationaryCovariance)->Arg(2)->Arg(3)->Arg(5);

void BM_SimulatePath(benchmark::State& state) {
  const auto e = make_economy(static_cast<int>(state.range(0)));
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 1e-3;
  cfg.record_stride = 1000;
  std::size_t path = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_path(cfg, e.params, e.agents, path++));
}
BENCHMARK(BM_SimulatePath)->Arg(1)->Arg(4);

void BM_SolveRiccati(benchmark::State& state) {
  const auto e = make_economy(static_cast<int>(state.range(0)));
  const auto coeffs = assemble_economy(e.params, e.agents);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_riccati(coeffs, e.params, {.tau_max = 5.0, .dtau = 1e-3}));
  }
}
BENCHMARK(BM_SolveRiccati)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_StockPrice(benchmark::State& state) {
  const auto e = make_economy(2);
  const auto coeffs = assemble_economy(e.params, e.agents);
  const auto sol = solve_riccati(coeffs, e.params, {.tau_max = 20.0, .dtau = 1e-3});
  const Eigen::VectorXd z = Eigen::Vector3d(0.3, -0.2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(stock_price(sol, z, e.params));
}
BENCHMARK(BM_StockPrice)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
