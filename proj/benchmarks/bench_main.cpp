#include <benchmark/benchmark.h>

#include <random>

#include "pcnsim/game.hpp"
#include "pcnsim/pathfinding.hpp"
#include "pcnsim/probe.hpp"
#include "pcnsim/sim.hpp"

namespace {

using namespace pcn;

Network network(std::size_t nodes) {
  SyntheticOptions opts;
  opts.nodes = nodes;
  return initialize_balances(sample_missing_params(ingest_snapshot(generate_snapshot(opts, 1)), 1), 1);
}

void BM_FindPath(benchmark::State& state) {
  Network net = network(static_cast<std::size_t>(state.range(0)));
  BeliefStore beliefs;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<NodeIndex> node(0, static_cast<NodeIndex>(net.node_count() - 1));
  for (auto _ : state) {
    NodeIndex s = node(rng), r = node(rng);
    if (s == r) continue;
    PathQuery q{s, r, 30'000, 1.5e-7, 100.0, true};
    benchmark::DoNotOptimize(find_path(net, q, beliefs, 0.0));
  }
}
BENCHMARK(BM_FindPath)->Arg(600)->Arg(3000);

void BM_Simulation(benchmark::State& state) {
  Network net = network(600);
  SimConfig cfg;
  cfg.seed = 5;
  cfg.num_runs = 1;
  cfg.num_payments = static_cast<std::size_t>(state.range(0));
  cfg.fee_model = FeeModel::ModIncentivized;
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(net, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulation)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BackwardInduct(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  GameInputs in;
  in.path_length = n;
  in.fees.assign(n, 10);
  in.collaterals.assign(n, 3.0);
  in.amounts.assign(n, 10'000);
  in.success_utility = 1e6;
  std::vector<PartyBelief> beliefs(n + 1, {0.8, true});
  for (auto _ : state) {
    GameTree t = build_game_tree(in);
    benchmark::DoNotOptimize(backward_induct(t, beliefs));
  }
}
BENCHMARK(BM_BackwardInduct)->DenseRange(2, 8, 2);

void BM_ProbeSearch(benchmark::State& state) {
  ProbeScenario s;
  s.balance = 2'345'678;
  for (auto _ : state) benchmark::DoNotOptimize(binary_search_balance(s));
}
BENCHMARK(BM_ProbeSearch);

}  // namespace
BENCHMARK_MAIN();
