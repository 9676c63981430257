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

#include "airmarket/horizon.hpp"

#include <cmath>
#include <cstring>
#include <set>

#include "gtest/gtest.h"

namespace airmarket {
namespace {

TEST(AuctionTimesTest, SpecExamples) {
  const std::vector<int> t = auction_times(400, 13);
  ASSERT_EQ(t.size(), 13u);
  for (int i = 0; i < 13; ++i) EXPECT_EQ(t[i], 30 * i + 1);
  EXPECT_EQ(t.back(), 361);
  EXPECT_EQ(auction_times(400, 1), std::vector<int>{1});
  const std::vector<int> unit = auction_times(10, 10);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(unit[i], i + 1);
  EXPECT_THROW(auction_times(10, 11), ModelError);
  EXPECT_THROW(auction_times(10, 0), ModelError);
}

// Two regions, one flight A -> B, used to build menus by hand.
Scenario tiny_scenario(double port_capacity, int flights, int horizon) {
  Scenario s;
  s.name = "tiny";
  s.horizon = horizon;
  s.regions = {{"A", "vertiport", RegionCapacity::uniform(port_capacity, port_capacity, 9)},
               {"B", "vertiport", RegionCapacity::uniform(9, 9, 9)}};
  s.adjacency = {{"A", "B"}};
  for (int k = 0; k < flights; ++k) {
    FlightRequest f;
    f.id = "F" + std::to_string(k);
    f.departure = 1;
    f.itinerary = {{"A", 0}, {"B", 1}};
    f.value = 200.0;
    f.initial_budget = 80.0;
    s.requests.push_back(f);
  }
  s.market.grant_min = 150;
  s.market.grant_max = 250;
  return s;
}

TEST(BuildRequestTest, ValuationsDecayWithRebasesAndDelay) {
  const Scenario s = tiny_scenario(1.0, 1, 20);
  const auto g = TimeExtendedGraph::build(s.spatial(), s.horizon, s.step_seconds);
  const VehicleRequest fresh = build_request(g, s.requests[0], 1, 0, 100.0, s.market);
  ASSERT_EQ(fresh.menu.size(), 5u);
  EXPECT_DOUBLE_EQ(fresh.values[0], 200.0);
  EXPECT_NEAR(fresh.values[2], 180.5, 1e-12);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(fresh.menu[k].start_time, 1 + int(k));
  const VehicleRequest once = build_request(g, s.requests[0], 7, 1, 100.0, s.market);
  EXPECT_DOUBLE_EQ(once.values[0], 100.0);
  EXPECT_EQ(once.menu[0].start_time, 7);
  // Near the end of the horizon only some delay offsets still fit.
  const VehicleRequest late = build_request(g, s.requests[0], 17, 0, 100.0, s.market);
  EXPECT_EQ(late.menu.size(), 2u);
  EXPECT_TRUE(build_request(g, s.requests[0], 19, 0, 100.0, s.market).menu.empty());
}

// One departure slot per step at A and five identical flights: one leaves
// per step, so a 5-step menu serves everyone only when capacity allows.
TEST(CampaignTest, RepeatedDropsEndAsNeverAllocated) {
  Scenario s = tiny_scenario(0.0, 1, 40);
  s.auctions = 4;
  for (Mechanism m : {Mechanism::kFisher, Mechanism::kClockBudget, Mechanism::kClockProfit}) {
    CampaignConfig c = campaign_config(s);
    c.mechanism = m;
    const CampaignResult r = run_campaign(s, c);
    const AgentRecord& a = r.agents[0];
    EXPECT_EQ(a.state, AgentState::kNeverAllocated) << to_string(m);
    EXPECT_EQ(a.rebases, 2);
    EXPECT_EQ(r.auctions[0].rebased_once, 1);
    EXPECT_EQ(r.auctions[1].rebased_twice, 1);
    EXPECT_EQ(r.auctions[2].dropped, 1);
    EXPECT_EQ(r.auctions[3].pool, 0);
    EXPECT_EQ(r.metrics.never_allocated, 1);
    EXPECT_EQ(r.metrics.num_times_rebased, 2);
    EXPECT_DOUBLE_EQ(r.metrics.avg_times_rebased, 2.0);
    // Three grants, nothing paid: the whole budget carries over.
    EXPECT_GE(a.budget, 80.0 + 3 * 150.0);
    EXPECT_LE(a.budget, 80.0 + 3 * 250.0);
  }
}

TEST(CampaignTest, PaymentsLeaveTheBudgetAndGrantsAreSeeded) {
  Scenario s = tiny_scenario(1.0, 3, 40);
  s.auctions = 2;
  s.seed = 9;
  CampaignConfig c = campaign_config(s);
  c.mechanism = Mechanism::kClockBudget;
  const CampaignResult r = run_campaign(s, c);
  const CampaignResult again = run_campaign(s, c);
  for (std::size_t u = 0; u < r.agents.size(); ++u) {
    const AgentRecord& a = r.agents[u];
    EXPECT_EQ(a.state, AgentState::kAllocated);
    EXPECT_EQ(a.budget, again.agents[u].budget);
    const double granted = a.budget + a.payment - 80.0;
    EXPECT_GE(granted, 150.0);
    EXPECT_LE(granted, 250.0);
    EXPECT_EQ(granted, std::floor(granted));
  }
  // Three flights share one departure slot per step, so they leave at
  // distinct steps and at most one of them is on time.
  std::set<int> starts;
  double delay_sum = 0.0;
  for (const AgentRecord& a : r.agents) {
    starts.insert(a.start_time);
    delay_sum += a.delay;
    EXPECT_EQ(a.delay, a.start_time - 1);
  }
  EXPECT_EQ(starts.size(), 3u);
  EXPECT_EQ(r.metrics.num_delayed, 2);
  EXPECT_DOUBLE_EQ(r.metrics.avg_delay, delay_sum / 2);
  c.seed = 10;
  const CampaignResult other = run_campaign(s, c);
  bool differs = false;
  for (std::size_t u = 0; u < r.agents.size(); ++u) {
    differs |= r.agents[u].budget + r.agents[u].payment !=
               other.agents[u].budget + other.agents[u].payment;
  }
  EXPECT_TRUE(differs);
}

GeneratorParams stream(std::uint64_t seed, int flights) {
  GeneratorParams p;
  p.seed = seed;
  p.flights = flights;
  return p;
}

bool same_summary(const CampaignResult& a, const CampaignResult& b) {
  if (a.auctions.size() != b.auctions.size()) return false;
  for (std::size_t i = 0; i < a.auctions.size(); ++i) {
    const AuctionReport &x = a.auctions[i], &y = b.auctions[i];
    if (x.iterations != y.iterations || std::memcmp(&x.ce, &y.ce, sizeof x.ce) != 0 ||
        std::memcmp(&x.mce, &y.mce, sizeof x.mce) != 0 || x.allocated != y.allocated) {
      return false;
    }
  }
  for (std::size_t u = 0; u < a.agents.size(); ++u) {
    if (std::memcmp(&a.agents[u].budget, &b.agents[u].budget, sizeof(double)) != 0 ||
        a.agents[u].edges != b.agents[u].edges) {
      return false;
    }
  }
  return true;
}

TEST(CampaignTest, ContestedCampaignIsSafeAndDeterministic) {
  const Scenario s = generate_scenario(stream(2, 50));
  CampaignConfig c = campaign_config(s);
  c.capacity_fraction = 0.5;
  c.auctions = 5;
  for (Mechanism m : {Mechanism::kFisher, Mechanism::kClockBudget, Mechanism::kClockProfit}) {
    c.mechanism = m;
    c.solver.policy = ExecutionPolicy::kParallel;
    const CampaignResult r = run_campaign(s, c);
    c.solver.policy = ExecutionPolicy::kSerial;
    const CampaignResult serial = run_campaign(s, c);
    EXPECT_TRUE(same_summary(r, serial)) << to_string(m);
    EXPECT_TRUE(r.audit.ok());
    EXPECT_EQ(r.metrics.safety_violations, 0);
    EXPECT_EQ(r.metrics.failures, 0);
    int allocated = 0;
    for (const AgentRecord& a : r.agents) {
      EXPECT_GE(a.budget, 0.0);
      EXPECT_LE(a.rebases, 2);
      allocated += a.state == AgentState::kAllocated;
    }
    EXPECT_EQ(allocated + r.metrics.never_allocated, 50);
    // Nobody is served twice: allocations per auction add up.
    int served = 0;
    for (const AuctionReport& a : r.auctions) served += a.allocated + a.delayed;
    EXPECT_EQ(served, allocated);
  }
}

TEST(CampaignTest, FullCapacityAllocatesEveryone) {
  const Scenario s = generate_scenario(stream(1, 30));
  CampaignConfig c = campaign_config(s);
  c.capacity_fraction = 1.0;
  c.auctions = 3;
  const CampaignResult r = run_campaign(s, c);
  EXPECT_EQ(r.metrics.never_allocated, 0);
  EXPECT_EQ(r.metrics.num_delayed, 0);
}

TEST(CampaignTest, SnapshotsKeepTheFractionalInputs) {
  const Scenario s = generate_scenario(stream(3, 20));
  CampaignConfig c = campaign_config(s);
  c.auctions = 2;
  c.keep_snapshots = true;
  const CampaignResult r = run_campaign(s, c);
  ASSERT_FALSE(r.snapshots.empty());
  for (const AuctionSnapshot& snap : r.snapshots) {
    EXPECT_EQ(snap.requests.size(), snap.result.demand.size());
    EXPECT_FALSE(snap.capacity.empty());
  }
}

TEST(CampaignTest, RejectsBadConfig) {
  const Scenario s = tiny_scenario(1.0, 1, 20);
  CampaignConfig c = campaign_config(s);
  c.capacity_fraction = 1.5;
  EXPECT_THROW(run_campaign(s, c), ModelError);
  c = campaign_config(s);
  c.auctions = 21;
  EXPECT_THROW(run_campaign(s, c), ModelError);
  EXPECT_THROW(parse_mechanism("vcg"), ModelError);
  EXPECT_EQ(parse_mechanism("clock-profit"), Mechanism::kClockProfit);
}

}  // namespace
}  // namespace airmarket
