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

#include "airmarket/clock_auction.hpp"

#include <algorithm>
#include <cmath>

namespace airmarket {

const char* to_string(BidMode mode) {
  return mode == BidMode::kBudget ? "budget" : "profit";
}

IntegralChoice bid_budget_based(const AgentModel& agent,
                                std::span<const double> prices,
                                double outside_price) {
  return solve_integral_iop(agent, prices, outside_price);
}

IntegralChoice bid_profit_based(const AgentModel& agent,
                                std::span<const double> prices,
                                double outside_price) {
  const VehicleRequest& r = agent.request();
  if (!(outside_price > 0.0)) throw ModelError("outside price must be positive");
  const bool buy_outside = r.outside_value >= outside_price;
  auto outside_units = [&](double cost) {
    return buy_outside ? (r.budget - cost) / outside_price : 0.0;
  };
  auto outside_gain = [&](double units) {
    return (r.outside_value - outside_price) * units;
  };
  IntegralChoice best;
  best.route = -1;
  best.outside_units = outside_units(0.0);
  best.utility = r.drop_value + outside_gain(best.outside_units);
  double best_value = r.drop_value;
  bool have_route = false;
  for (std::size_t s = 0; s < r.menu.size(); ++s) {
    const double cost = agent.route_cost(s, prices);
    if (!std::isfinite(cost) || cost > r.budget) continue;
    const double units = outside_units(cost);
    const double profit = r.values[s] - cost + outside_gain(units);
    bool take = profit > best.utility;
    if (profit == best.utility) {
      take = !have_route ? r.values[s] >= best_value : r.values[s] > best_value;
    }
    if (take) {
      best.route = static_cast<int>(s);
      best.outside_units = units;
      best.cost = cost;
      best.utility = profit;
      best_value = r.values[s];
      have_route = true;
    }
  }
  return best;
}

void ClockConfig::validate() const {
  if (!(beta > 0.0)) throw ModelError("clock auction: increment must be positive");
  if (max_rounds < 1) throw ModelError("clock auction: max_rounds must be >= 1");
  if (!(outside_price > 0.0)) throw ModelError("outside price must be positive");
}

ClockResult run_clock_auction(const Market& market, const ClockConfig& config) {
  config.validate();
  const TimeExtendedGraph& g = market.graph();
  const std::ptrdiff_t U = static_cast<std::ptrdiff_t>(market.num_agents());
  std::vector<double> prices(g.num_edges(), 0.0);
  std::vector<IntegralChoice> bids(U);
  std::vector<double> load(g.num_edges());
  auto bid = [&](std::ptrdiff_t u) {
    const AgentModel& a = market.agents()[u];
    bids[u] = config.mode == BidMode::kBudget
                  ? bid_budget_based(a, prices, config.outside_price)
                  : bid_profit_based(a, prices, config.outside_price);
  };

  ClockResult res;
  while (true) {
    ++res.rounds;
    if (config.policy == ExecutionPolicy::kSerial) {
      for (std::ptrdiff_t u = 0; u < U; ++u) bid(u);
    } else {
#pragma omp parallel for schedule(dynamic, 4)
      for (std::ptrdiff_t u = 0; u < U; ++u) bid(u);
    }
    std::fill(load.begin(), load.end(), 0.0);
    for (std::ptrdiff_t u = 0; u < U; ++u) {
      if (bids[u].route < 0) continue;
      const Route& s = market.agents()[u].request().menu[bids[u].route];
      for (EdgeId e : s.edges) load[e] += 1.0;
    }
    bool contested = false;
    for (EdgeId e = 0; e < g.num_constrained(); ++e) {
      if (market.capacity()[e] < load[e]) {
        contested = true;
        prices[e] += config.beta;
      }
    }
    if (!contested) {
      res.converged = true;
      break;
    }
    if (res.rounds >= config.max_rounds) break;
  }

  IntegralOutcome& out = res.outcome;
  out.prices = prices;
  out.load = load;
  out.remaining = market.capacity();
  for (EdgeId e = 0; e < g.num_constrained(); ++e) out.remaining[e] -= load[e];
  out.passes = static_cast<int>(std::min<long>(res.rounds * U, 1L << 30));
  out.agents.resize(U);
  for (std::ptrdiff_t u = 0; u < U; ++u) {
    const VehicleRequest& r = market.agents()[u].request();
    const IntegralChoice& b = bids[u];
    AgentOutcome& o = out.agents[u];
    o.route = b.route;
    o.outside_units = b.outside_units;
    o.route_payment = b.route >= 0 ? b.cost : 0.0;
    if (b.route < 0) {
      o.status = AllocationStatus::kDropped;
    } else {
      o.status = static_cast<std::size_t>(b.route) == r.preferred
                     ? AllocationStatus::kPreferred
                     : AllocationStatus::kDelayed;
      o.delay = r.menu[b.route].start_time - r.menu[r.preferred].start_time;
    }
  }
  return res;
}

}  // namespace airmarket
