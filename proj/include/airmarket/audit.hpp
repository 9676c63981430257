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

// Post-hoc safety audit of integral allocations, recomputed from raw routes,
// capacities and prices without trusting the allocator's bookkeeping.

#ifndef AIRMARKET_AUDIT_HPP_
#define AIRMARKET_AUDIT_HPP_

#include <span>
#include <string>
#include <vector>

#include "airmarket/fisher_admm.hpp"
#include "airmarket/integral_alloc.hpp"

namespace airmarket {

// One accepted flight: the edges it occupies, what it paid and what it could
// spend, and the menu it was chosen from.
struct AcceptedBundle {
  std::string agent;
  std::vector<EdgeId> edges;
  std::vector<std::vector<EdgeId>> menu;
  double payment = 0.0;  // credits, outside good included
  double budget = 0.0;
};

struct SafetyViolation {
  std::string kind;  // "capacity", "menu", "route" or "budget"
  std::string agent;
  EdgeId edge = -1;
  double amount = 0.0;
};

struct SafetyReport {
  std::vector<SafetyViolation> violations;
  int bundles = 0;
  bool ok() const { return violations.empty(); }
};

SafetyReport audit_bundles(const TimeExtendedGraph& g,
                           std::span<const double> capacity,
                           std::span<const AcceptedBundle> bundles);

// Bundles of one auction: every non-dropped agent with its route, payment
// recomputed from `prices` plus outside units at `outside_price`. Dropped
// agents are checked for budget only.
std::vector<AcceptedBundle> bundles_of(const Market& market,
                                       const IntegralOutcome& outcome,
                                       std::span<const double> prices,
                                       double outside_price);

SafetyReport audit_outcome(const Market& market, const IntegralOutcome& outcome,
                           std::span<const double> prices,
                           double outside_price);

}  // namespace airmarket

#endif  // AIRMARKET_AUDIT_HPP_
