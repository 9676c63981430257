// Copyright 2026 The airmarket Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference versus OpenMP kernels on one auction holding every flight
// of a generated stream at half capacity.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "airmarket/clock_auction.hpp"
#include "airmarket/fisher_admm.hpp"
#include "airmarket/horizon.hpp"
#include "airmarket/scenario.hpp"

namespace airmarket {
namespace {

struct Instance {
  Scenario scenario;
  TimeExtendedGraph graph;
  std::unique_ptr<Market> market;
};

const Instance& instance(int flights) {
  static std::map<int, std::unique_ptr<Instance>> cache;
  auto& slot = cache[flights];
  if (!slot) {
    GeneratorParams p;
    p.flights = flights;
    p.seed = 1;
    slot = std::make_unique<Instance>();
    slot->scenario = generate_scenario(p);
    slot->graph = TimeExtendedGraph::build(slot->scenario.spatial(0.5),
                                           slot->scenario.horizon,
                                           slot->scenario.step_seconds);
    std::vector<AgentModel> agents;
    for (const FlightRequest& f : slot->scenario.requests) {
      VehicleRequest r = build_request(slot->graph, f, f.departure, 0, 200.0,
                                       slot->scenario.market);
      if (!r.menu.empty()) agents.emplace_back(slot->graph, std::move(r));
    }
    slot->market = std::make_unique<Market>(slot->graph, std::move(agents));
  }
  return *slot;
}

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(1) == 0 ? ExecutionPolicy::kSerial : ExecutionPolicy::kParallel;
}

// A state a few hundred iterations in, so prices and shifts are non-trivial.
MarketState warmed_state(const Market& market, const SolverConfig& config) {
  MarketState s = MarketState::initial(market);
  for (int k = 0; k < 200; ++k) inner_step(market, s, config);
  return s;
}

void BM_DemandKernel(benchmark::State& state) {
  const Market& market = *instance(static_cast<int>(state.range(0))).market;
  SolverConfig config;
  MarketState s = warmed_state(market, config);
  for (auto _ : state) {
    demand_kernel(market, s, config, policy_of(state));
    benchmark::ClobberMemory();
  }
  state.counters["agents"] = static_cast<double>(market.num_agents());
}

void BM_EdgeKernel(benchmark::State& state) {
  const Market& market = *instance(static_cast<int>(state.range(0))).market;
  SolverConfig config;
  MarketState s = warmed_state(market, config);
  for (auto _ : state) {
    edge_kernel(market, s, config.beta, policy_of(state));
    benchmark::ClobberMemory();
  }
  state.counters["edges"] = static_cast<double>(market.active_edges().size());
}

void BM_ClockAuction(benchmark::State& state) {
  const Market& market = *instance(static_cast<int>(state.range(0))).market;
  ClockConfig config;
  config.policy = policy_of(state);
  long rounds = 0;
  for (auto _ : state) {
    const ClockResult r = run_clock_auction(market, config);
    rounds = r.rounds;
    benchmark::DoNotOptimize(r.outcome.agents.data());
  }
  state.counters["rounds"] = static_cast<double>(rounds);
}

void BM_FisherSolve(benchmark::State& state) {
  const Market& market = *instance(static_cast<int>(state.range(0))).market;
  SolverConfig config;
  config.policy = policy_of(state);
  config.max_outer = 20;
  for (auto _ : state) {
    const FractionalResult r = run_algorithm1(market, config);
    benchmark::DoNotOptimize(r.prices.data());
  }
}

// range(0): flights in the stream, range(1): 0 serial, 1 OpenMP.
void sizes(benchmark::internal::Benchmark* b) {
  for (int flights : {50, 177, 400}) {
    for (int parallel : {0, 1}) b->Args({flights, parallel});
  }
  b->ArgNames({"flights", "omp"})->Unit(benchmark::kMicrosecond);
}

BENCHMARK(BM_DemandKernel)->Apply(sizes);
BENCHMARK(BM_EdgeKernel)->Apply(sizes);
BENCHMARK(BM_ClockAuction)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FisherSolve)->Apply(sizes)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
}  // namespace airmarket

BENCHMARK_MAIN();
