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

// Rounding of a fractional equilibrium: agents are ranked by their
// fractional demand for the preferred route and then served one by one at
// frozen prices. Goods that an agent's choice would over-subscribe are
// removed (priced at +inf) and the agent chooses again.

#ifndef AIRMARKET_INTEGRAL_ALLOC_HPP_
#define AIRMARKET_INTEGRAL_ALLOC_HPP_

#include <span>
#include <string>
#include <vector>

#include "airmarket/agents.hpp"
#include "airmarket/fisher_admm.hpp"

namespace airmarket {

enum class AllocationStatus { kPreferred, kDelayed, kDropped };

const char* to_string(AllocationStatus status);

struct RankedList {
  std::vector<int> order;    // market agent indices, best first
  std::vector<double> keys;  // key of order[i]
};

// Descending by the fractional weight of the preferred route; ties go to the
// larger budget, then to the smaller request id.
RankedList rank_vehicles(const Market& market,
                         std::span<const RouteDemand> demand);

struct AgentOutcome {
  AllocationStatus status = AllocationStatus::kDropped;
  int route = -1;  // menu index, -1 for the drop option
  double route_payment = 0.0;  // p . x over the route's edges
  double outside_units = 0.0;
  int delay = 0;  // start of the chosen route minus start of the preferred one
};

struct IntegralOutcome {
  std::vector<AgentOutcome> agents;  // indexed like the market
  std::vector<double> prices;        // per edge, removed goods at kUnlimited
  std::vector<double> remaining;     // capacity left per edge
  std::vector<double> load;          // accepted routes per edge
  std::vector<EdgeId> removed;       // in removal order
  int passes = 0;                    // integral demand evaluations

  // Integral allocation of agent u in the edge space of its menu.
  AllocationVector allocation(const Market& market, std::size_t u) const;
};

// Serves agents in rank order. `prices` are indexed by edge id and must be
// finite and nonnegative.
IntegralOutcome run_algorithm2(const Market& market,
                               std::span<const double> prices,
                               double outside_price, const RankedList& rank);

// Fraction of constrained edges of the graph that carry a positive finite
// price while used strictly below capacity.
double metric_mce_after_integral(const Market& market,
                                 const IntegralOutcome& outcome,
                                 std::span<const double> prices);

}  // namespace airmarket

#endif  // AIRMARKET_INTEGRAL_ALLOC_HPP_
