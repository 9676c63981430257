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

#include "airmarket/audit.hpp"

#include <algorithm>
#include <cmath>

namespace airmarket {

SafetyReport audit_bundles(const TimeExtendedGraph& g,
                           std::span<const double> capacity,
                           std::span<const AcceptedBundle> bundles) {
  if (capacity.size() != static_cast<std::size_t>(g.num_edges())) {
    throw ModelError("audit: one capacity per edge required");
  }
  SafetyReport rep;
  std::vector<double> load(g.num_edges(), 0.0);
  for (const AcceptedBundle& b : bundles) {
    ++rep.bundles;
    if (b.payment > b.budget + 1e-9 * std::max(1.0, b.budget) ||
        !std::isfinite(b.payment)) {
      rep.violations.push_back({"budget", b.agent, -1, b.payment - b.budget});
    }
    if (b.edges.empty()) continue;  // drop option
    if (std::find(b.menu.begin(), b.menu.end(), b.edges) == b.menu.end()) {
      rep.violations.push_back({"menu", b.agent, -1, 0.0});
    }
    for (EdgeId e : b.edges) {
      if (!g.contains(e)) {
        rep.violations.push_back({"route", b.agent, e, 0.0});
        continue;
      }
      load[e] += 1.0;
    }
    if (!validate_route(g, b.edges).valid) {
      rep.violations.push_back({"route", b.agent, -1, 0.0});
    }
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (g.edge(e).constrained() && load[e] > capacity[e]) {
      rep.violations.push_back({"capacity", "", e, load[e] - capacity[e]});
    }
  }
  return rep;
}

std::vector<AcceptedBundle> bundles_of(const Market& market,
                                       const IntegralOutcome& outcome,
                                       std::span<const double> prices,
                                       double outside_price) {
  std::vector<AcceptedBundle> out;
  for (std::size_t u = 0; u < market.num_agents(); ++u) {
    const VehicleRequest& r = market.agents()[u].request();
    const AgentOutcome& o = outcome.agents.at(u);
    AcceptedBundle b;
    b.agent = r.id;
    b.budget = r.budget;
    b.payment = outside_price * o.outside_units;
    for (const Route& s : r.menu) b.menu.push_back(s.edges);
    if (o.route >= 0) {
      b.edges = r.menu.at(o.route).edges;
      for (EdgeId e : b.edges) b.payment += prices[e];
    }
    out.push_back(std::move(b));
  }
  return out;
}

SafetyReport audit_outcome(const Market& market, const IntegralOutcome& outcome,
                           std::span<const double> prices,
                           double outside_price) {
  const auto bundles = bundles_of(market, outcome, prices, outside_price);
  return audit_bundles(market.graph(), market.capacity(), bundles);
}

}  // namespace airmarket
