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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airmarket {
namespace {

// Integral capacities are compared with a small allowance for capacities
// that come from scaled inputs.
constexpr double kSlotEps = 1e-9;

}  // namespace

const char* to_string(AllocationStatus status) {
  switch (status) {
    case AllocationStatus::kPreferred:
      return "preferred";
    case AllocationStatus::kDelayed:
      return "delayed";
    case AllocationStatus::kDropped:
      return "dropped";
  }
  return "?";
}

RankedList rank_vehicles(const Market& market,
                         std::span<const RouteDemand> demand) {
  const std::size_t U = market.num_agents();
  if (demand.size() != U) throw ModelError("rank: one demand per agent required");
  std::vector<double> key(U);
  for (std::size_t u = 0; u < U; ++u) {
    const VehicleRequest& r = market.agents()[u].request();
    if (r.preferred >= r.menu.size() || demand[u].routes.size() != r.menu.size()) {
      throw ModelError("rank: agent " + r.id + " has no preferred route demand");
    }
    key[u] = demand[u].routes[r.preferred];
  }
  RankedList out;
  out.order.resize(U);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    if (key[a] != key[b]) return key[a] > key[b];
    const VehicleRequest& ra = market.agents()[a].request();
    const VehicleRequest& rb = market.agents()[b].request();
    if (ra.budget != rb.budget) return ra.budget > rb.budget;
    return ra.id < rb.id;
  });
  for (int u : out.order) out.keys.push_back(key[u]);
  return out;
}

AllocationVector IntegralOutcome::allocation(const Market& market,
                                             std::size_t u) const {
  const AgentModel& agent = market.agents()[u];
  const AgentOutcome& o = agents[u];
  RouteDemand d;
  d.routes.assign(agent.num_routes(), 0.0);
  if (o.route >= 0) {
    d.routes[o.route] = 1.0;
  } else {
    d.drop = 1.0;
  }
  d.outside = o.outside_units;
  AllocationVector x = agent.expand(d);
  x.integral = true;
  return x;
}

IntegralOutcome run_algorithm2(const Market& market,
                               std::span<const double> prices,
                               double outside_price, const RankedList& rank) {
  const TimeExtendedGraph& g = market.graph();
  const std::size_t U = market.num_agents();
  if (prices.size() != static_cast<std::size_t>(g.num_edges())) {
    throw ModelError("integral allocation: one price per edge required");
  }
  for (double p : prices) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ModelError("integral allocation: prices must be finite and nonnegative");
    }
  }
  std::vector<char> seen(U, 0);
  for (int u : rank.order) {
    if (u < 0 || static_cast<std::size_t>(u) >= U || seen[u]) {
      throw ModelError("integral allocation: ranking is not a permutation of the agents");
    }
    seen[u] = 1;
  }
  if (rank.order.size() != U) {
    throw ModelError("integral allocation: ranking is not a permutation of the agents");
  }

  IntegralOutcome out;
  out.agents.resize(U);
  out.prices.assign(prices.begin(), prices.end());
  out.remaining = market.capacity();
  out.load.assign(g.num_edges(), 0.0);
  std::vector<EdgeId> over;
  for (int u : rank.order) {
    const AgentModel& agent = market.agents()[u];
    const VehicleRequest& req = agent.request();
    while (true) {
      const IntegralChoice ch = solve_integral_iop(agent, out.prices, outside_price);
      ++out.passes;
      AgentOutcome& o = out.agents[u];
      if (ch.route < 0) {
        o = {AllocationStatus::kDropped, -1, 0.0, ch.outside_units, 0};
        break;
      }
      const Route& route = req.menu[ch.route];
      over.clear();
      for (EdgeId e : route.edges) {
        if (g.edge(e).constrained() && out.remaining[e] < 1.0 - kSlotEps) {
          over.push_back(e);
        }
      }
      if (over.empty()) {
        for (EdgeId e : route.edges) {
          out.load[e] += 1.0;
          if (g.edge(e).constrained()) out.remaining[e] -= 1.0;
        }
        const bool preferred = static_cast<std::size_t>(ch.route) == req.preferred;
        o = {preferred ? AllocationStatus::kPreferred : AllocationStatus::kDelayed,
             ch.route, ch.cost, ch.outside_units,
             route.start_time - req.menu[req.preferred].start_time};
        break;
      }
      for (EdgeId e : over) {
        out.prices[e] = kUnlimited;
        out.removed.push_back(e);
      }
    }
  }
  return out;
}

double metric_mce_after_integral(const Market& market,
                                 const IntegralOutcome& outcome,
                                 std::span<const double> prices) {
  const TimeExtendedGraph& g = market.graph();
  if (prices.size() != static_cast<std::size_t>(g.num_edges()) ||
      outcome.load.size() != prices.size()) {
    throw ModelError("market clearing error: dimension mismatch");
  }
  if (g.num_constrained() == 0) return 0.0;
  int count = 0;
  for (EdgeId e = 0; e < g.num_constrained(); ++e) {
    const double p = prices[e];
    if (p > 0.0 && std::isfinite(p) &&
        outcome.load[e] < market.capacity()[e] - kSlotEps) {
      ++count;
    }
  }
  return static_cast<double>(count) / g.num_constrained();
}

}  // namespace airmarket
