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

// Post-hoc certificate that an allocation and price vector form a fractional
// competitive equilibrium: capacity, complementarity, individual optimality
// of the relaxed demand problem at the given prices, and budget equality.

#ifndef AIRMARKET_VERIFY_HPP_
#define AIRMARKET_VERIFY_HPP_

#include <span>
#include <string>
#include <vector>

#include "airmarket/agents.hpp"
#include "airmarket/fisher_admm.hpp"

namespace airmarket {

// Exact optimum of the relaxed demand problem (fractional routes, budget
// spent on routes and the outside good) by enumerating the vertices of its
// two-constraint feasible set.
struct RelaxedOptimum {
  double utility = 0.0;
  RouteDemand demand;
};
RelaxedOptimum relaxed_optimum(const AgentModel& agent,
                               std::span<const double> prices, double p_o);

struct AgentCertificate {
  double utility = 0.0;
  double optimum = 0.0;
  double gap = 0.0;            // (optimum - utility) / max(1, |optimum|)
  double feasibility = 0.0;    // flow, tie and selection rows, and x >= 0
  double stationarity = 0.0;   // KKT residual / max(1, max value)
  double slackness = 0.0;      // |mu_i x_i| and budget slack terms, scaled
  double budget_residual = 0.0;  // |p.x + p_o x_o - w|
  // Recovered multipliers: budget, selection, row multipliers, positivity.
  double budget_multiplier = 0.0;
  double selection_multiplier = 0.0;
  std::vector<double> kappa;
  std::vector<double> mu;  // per support column, then outside and drop
};

// Checks (a) and (c), and the threshold below which a coordinate counts as
// at its bound, are in allocation units; (b) and (d) are in credits.
struct VerifyTolerance {
  double allocation = 0.0;
  double credits = 0.0;
};

struct KktCertificate {
  double tol = 0.0;         // allocation units
  double credit_tol = 0.0;  // credits
  double capacity_residual = 0.0;         // (a) max_e (sum_u x - l)
  double complementarity_residual = 0.0;  // (b) max_e |p_e (sum_u x - l)|
  double optimality_residual = 0.0;       // (c) worst agent residual
  double budget_residual = 0.0;           // (d) worst agent budget residual
  EdgeId worst_capacity_edge = -1;
  EdgeId worst_complementarity_edge = -1;
  int worst_optimality_agent = -1;
  int worst_budget_agent = -1;
  std::vector<AgentCertificate> agents;

  bool capacity_ok() const { return capacity_residual <= tol; }
  bool complementarity_ok() const {
    return complementarity_residual <= credit_tol;
  }
  bool optimality_ok() const { return optimality_residual <= tol; }
  bool budget_ok() const { return budget_residual <= credit_tol; }
  bool passed() const {
    return capacity_ok() && complementarity_ok() && optimality_ok() &&
           budget_ok();
  }
  // Letter of the first failing check ("a".."d"), empty when passed.
  std::string first_failure() const;
  double max_residual() const;
};

// `allocations` holds one edge-space vector per market agent; `prices` is
// indexed by edge id and must be nonnegative. Throws ModelError on
// dimension mismatch.
KktCertificate verify_fractional_ce(const Market& market,
                                    std::span<const AllocationVector> allocations,
                                    std::span<const double> prices,
                                    double outside_price, VerifyTolerance tol);

// One tolerance for every check.
KktCertificate verify_fractional_ce(const Market& market,
                                    std::span<const AllocationVector> allocations,
                                    std::span<const double> prices,
                                    double outside_price, double tol);

// Convenience overload for solver output.
KktCertificate verify_fractional_ce(const Market& market,
                                    const FractionalResult& result,
                                    double outside_price, double tol);

}  // namespace airmarket

#endif  // AIRMARKET_VERIFY_HPP_
