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

#include "airmarket/integral_alloc.hpp"

#include <random>

#include "airmarket/audit.hpp"
#include "fixtures.hpp"
#include "gtest/gtest.h"

namespace airmarket {
namespace {

using testing::abc_graph;

VehicleRequest request(const TimeExtendedGraph& g, const std::string& id,
                       std::vector<int> starts, double budget) {
  VehicleRequest r;
  r.id = id;
  const std::vector<Leg> legs{{0, 0}, {1, 1}};
  for (int t : starts) {
    r.menu.push_back(*route_from_itinerary(g, t, legs));
    r.values.push_back(200.0 - 10.0 * r.menu.size());
  }
  r.drop_value = 40.0;
  r.budget = budget;
  return r;
}

RouteDemand weights(std::size_t routes, double preferred) {
  RouteDemand d;
  d.routes.assign(routes, 0.0);
  d.routes[0] = preferred;
  d.drop = 1.0 - preferred;
  return d;
}

TEST(RankTest, SpecExamples) {
  const auto g = TimeExtendedGraph::build(abc_graph(5.0), 8, 15.0);
  const Market three(g, {AgentModel(g, request(g, "1", {1}, 100)),
                         AgentModel(g, request(g, "2", {1}, 100)),
                         AgentModel(g, request(g, "3", {1}, 100))});
  const std::vector<RouteDemand> d{weights(1, 0.9), weights(1, 0.5), weights(1, 0.7)};
  const RankedList r = rank_vehicles(three, d);
  EXPECT_EQ(r.order, (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(r.keys, (std::vector<double>{0.9, 0.7, 0.5}));

  const Market two(g, {AgentModel(g, request(g, "1", {1}, 10)),
                       AgentModel(g, request(g, "2", {1}, 20))});
  const std::vector<RouteDemand> tie{weights(1, 0.5), weights(1, 0.5)};
  EXPECT_EQ(rank_vehicles(two, tie).order, (std::vector<int>{1, 0}));

  const Market one(g, {AgentModel(g, request(g, "1", {1}, 10))});
  EXPECT_EQ(rank_vehicles(one, std::vector<RouteDemand>{weights(1, 0.3)}).order,
            std::vector<int>{0});
  EXPECT_THROW(rank_vehicles(one, std::vector<RouteDemand>{}), ModelError);
}

TEST(RankTest, EqualKeysAndBudgetsFallBackToId) {
  const auto g = TimeExtendedGraph::build(abc_graph(5.0), 8, 15.0);
  const Market m(g, {AgentModel(g, request(g, "b", {1}, 10)),
                     AgentModel(g, request(g, "a", {1}, 10))});
  EXPECT_EQ(rank_vehicles(m, std::vector<RouteDemand>{weights(1, 1), weights(1, 1)}).order,
            (std::vector<int>{1, 0}));
}

TEST(IntegralAllocTest, ContestedSlotGoesToTheFirstRanked) {
  const auto g = TimeExtendedGraph::build(abc_graph(1.0), 8, 15.0);
  // Both prefer t = 1; each has a private delayed option.
  const Market m(g, {AgentModel(g, request(g, "A", {1, 3}, 100)),
                     AgentModel(g, request(g, "B", {1, 5}, 100))});
  const std::vector<double> prices(g.num_edges(), 0.0);
  const RankedList rank{{0, 1}, {1.0, 1.0}};
  const IntegralOutcome o = run_algorithm2(m, prices, 10.0, rank);
  EXPECT_EQ(o.agents[0].status, AllocationStatus::kPreferred);
  EXPECT_EQ(o.agents[1].status, AllocationStatus::kDelayed);
  EXPECT_EQ(o.agents[1].route, 1);
  EXPECT_EQ(o.agents[1].delay, 4);
  EXPECT_FALSE(o.removed.empty());
  for (EdgeId e : o.removed) EXPECT_EQ(o.prices[e], kUnlimited);
  EXPECT_TRUE(audit_outcome(m, o, prices, 10.0).ok());

  // Exhaustive search over joint route choices: with A fixed on its
  // preferred route, B's best feasible option is the delayed route.
  const auto& ra = m.agents()[0].request().menu;
  const auto& rb = m.agents()[1].request().menu;
  int best = -2;
  for (int b : {0, 1, -1}) {
    bool fits = true;
    if (b >= 0) {
      for (EdgeId e : rb[b].edges) {
        const auto& a = ra[0].edges;
        if (g.edge(e).constrained() && std::find(a.begin(), a.end(), e) != a.end()) {
          fits = false;
        }
      }
    }
    if (fits && best == -2) best = b;
  }
  EXPECT_EQ(best, o.agents[1].route);
}

TEST(IntegralAllocTest, AmpleCapacityServesEveryoneOnTime) {
  const auto g = TimeExtendedGraph::build(abc_graph(10.0), 8, 15.0);
  std::vector<AgentModel> agents;
  for (int u = 0; u < 6; ++u) {
    agents.emplace_back(g, request(g, "u" + std::to_string(u), {1, 2}, 100));
  }
  const Market m(g, std::move(agents));
  const std::vector<double> prices(g.num_edges(), 0.0);
  const std::vector<RouteDemand> d(6, weights(2, 1.0));
  const IntegralOutcome o = run_algorithm2(m, prices, 10.0, rank_vehicles(m, d));
  for (const AgentOutcome& a : o.agents) {
    EXPECT_EQ(a.status, AllocationStatus::kPreferred);
    EXPECT_DOUBLE_EQ(a.outside_units, 10.0);
  }
  EXPECT_TRUE(o.removed.empty());
  EXPECT_EQ(o.passes, 6);
}

TEST(IntegralAllocTest, BlockedAgentDropsAndKeepsItsBudget) {
  const auto g = TimeExtendedGraph::build(abc_graph(1.0), 8, 15.0);
  const Market m(g, {AgentModel(g, request(g, "A", {1}, 100)),
                     AgentModel(g, request(g, "B", {1}, 80))});
  const std::vector<double> prices(g.num_edges(), 0.0);
  const IntegralOutcome o = run_algorithm2(m, prices, 10.0, RankedList{{0, 1}, {1, 1}});
  EXPECT_EQ(o.agents[1].status, AllocationStatus::kDropped);
  EXPECT_EQ(o.agents[1].route, -1);
  EXPECT_DOUBLE_EQ(o.agents[1].outside_units, 8.0);
  EXPECT_DOUBLE_EQ(o.agents[1].route_payment, 0.0);
}

TEST(IntegralAllocTest, RejectsBadInputs) {
  const auto g = TimeExtendedGraph::build(abc_graph(1.0), 8, 15.0);
  const Market m(g, {AgentModel(g, request(g, "A", {1}, 100))});
  std::vector<double> prices(g.num_edges(), 0.0);
  EXPECT_THROW(run_algorithm2(m, prices, 10.0, RankedList{{0, 0}, {1, 1}}), ModelError);
  EXPECT_THROW(run_algorithm2(m, prices, 10.0, RankedList{{}, {}}), ModelError);
  prices[0] = -1.0;
  EXPECT_THROW(run_algorithm2(m, prices, 10.0, RankedList{{0}, {1}}), ModelError);
}

// Random contested markets: feasibility, budgets and the pass bound.
TEST(IntegralAllocTest, RandomOutcomesAreSafe) {
  std::mt19937_64 rng(31);
  const auto g = TimeExtendedGraph::build(testing::line_graph(4, 1.0), 14, 15.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AgentModel> agents;
    std::vector<RouteDemand> d;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (agents.size() < 8) {
      VehicleRequest r = testing::random_request(g, rng, 1 + trial % 4,
                                                 "a" + std::to_string(agents.size()));
      if (r.menu.empty()) continue;
      d.push_back(weights(r.menu.size(), u(rng)));
      agents.emplace_back(g, std::move(r));
    }
    const Market m(g, std::move(agents));
    std::vector<double> prices(g.num_edges(), 0.0);
    for (EdgeId e = 0; e < g.num_constrained(); ++e) {
      if (u(rng) < 0.1) prices[e] = 20.0 * u(rng);
    }
    const IntegralOutcome o = run_algorithm2(m, prices, 10.0, rank_vehicles(m, d));
    const SafetyReport rep = audit_outcome(m, o, prices, 10.0);
    EXPECT_TRUE(rep.ok()) << "trial " << trial << " " << rep.violations[0].kind;
    EXPECT_LE(o.passes, static_cast<int>(m.num_agents()) + g.num_constrained());
    for (std::size_t k = 0; k < m.num_agents(); ++k) {
      const AgentOutcome& a = o.agents[k];
      const double spent = a.route_payment + 10.0 * a.outside_units;
      EXPECT_LE(spent, m.agents()[k].request().budget + 1e-9);
    }
    for (EdgeId e = 0; e < g.num_constrained(); ++e) {
      EXPECT_NEAR(o.remaining[e] + o.load[e], m.capacity()[e], 1e-12);
    }
  }
}

TEST(MarketClearingTest, SpecExamples) {
  const auto g = TimeExtendedGraph::build(abc_graph(1.0), 8, 15.0);
  const Market m(g, {AgentModel(g, request(g, "A", {1}, 100))});
  const std::vector<double> zero(g.num_edges(), 0.0);
  const IntegralOutcome o = run_algorithm2(m, zero, 10.0, RankedList{{0}, {1}});
  EXPECT_DOUBLE_EQ(metric_mce_after_integral(m, o, zero), 0.0);
  // A priced edge used to capacity is fine; a priced slack edge counts.
  std::vector<double> p = zero;
  p[m.agents()[0].request().menu[0].departing_edge] = 5.0;
  EXPECT_DOUBLE_EQ(metric_mce_after_integral(m, o, p), 0.0);
  p[testing::dep(g, 2, 3)] = 5.0;
  EXPECT_DOUBLE_EQ(metric_mce_after_integral(m, o, p), 1.0 / g.num_constrained());
}

TEST(AuditTest, DetectsInjectedViolations) {
  const auto g = TimeExtendedGraph::build(abc_graph(1.0), 8, 15.0);
  const Market m(g, {AgentModel(g, request(g, "A", {1, 3}, 100)),
                     AgentModel(g, request(g, "B", {1, 5}, 100))});
  const std::vector<double> prices(g.num_edges(), 0.0);
  IntegralOutcome o = run_algorithm2(m, prices, 10.0, RankedList{{0, 1}, {1, 1}});
  ASSERT_TRUE(audit_outcome(m, o, prices, 10.0).ok());
  IntegralOutcome clash = o;
  clash.agents[1].route = 0;
  const SafetyReport rep = audit_outcome(m, clash, prices, 10.0);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].kind, "capacity");
  IntegralOutcome rich = o;
  rich.agents[0].outside_units = 11.0;
  EXPECT_EQ(audit_outcome(m, rich, prices, 10.0).violations.at(0).kind, "budget");
  auto bundles = bundles_of(m, o, prices, 10.0);
  bundles[0].edges.pop_back();
  EXPECT_EQ(audit_bundles(g, m.capacity(), bundles).violations.at(0).kind, "menu");
}

}  // namespace
}  // namespace airmarket
