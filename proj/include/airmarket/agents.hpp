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

// Vehicle requests, their linear utility, the integral demand problem and
// the regularized per-agent x-update.

#ifndef AIRMARKET_AGENTS_HPP_
#define AIRMARKET_AGENTS_HPP_

#include <span>
#include <string>
#include <vector>

#include "airmarket/timexgraph.hpp"

namespace airmarket {

struct VehicleRequest {
  std::string id;
  std::vector<Route> menu;
  std::vector<double> values;  // one per route, same order as menu
  std::size_t preferred = 0;   // index of the preferred route in the menu
  double drop_value = 0.0;     // v_drop
  double outside_value = 1.0;  // v_o
  double budget = 0.0;         // w

  // Throws ModelError on negative values or budget, size mismatches or an
  // empty menu.
  void validate() const;
};

// Demand expressed per route: amount on each route's departing edge plus the
// outside good and the drop option.
struct RouteDemand {
  std::vector<double> routes;
  double outside = 0.0;
  double drop = 0.0;
};

// Edge-space allocation over the agent's support (ConstraintSystem order).
struct AllocationVector {
  std::vector<double> edges;
  double outside = 0.0;
  double drop = 0.0;
  bool integral = false;
};

// A request with its constraint system and the data the market needs:
// the priced (constrained) part of the support and route overlap counts.
class AgentModel {
 public:
  AgentModel(const TimeExtendedGraph& g, VehicleRequest request);

  const VehicleRequest& request() const { return request_; }
  const ConstraintSystem& constraints() const { return constraints_; }
  std::size_t num_routes() const { return request_.menu.size(); }

  // Constrained support edges, sorted by global id.
  const std::vector<EdgeId>& priced_edges() const { return priced_; }
  // Per route, indices into priced_edges().
  const std::vector<std::vector<int>>& route_priced() const {
    return route_priced_;
  }
  // Row-major S x S count of priced edges shared by routes s and s'.
  const std::vector<double>& gram() const { return gram_; }

  // Sum of prices over a route's edges; `prices` is indexed by edge id.
  double route_cost(std::size_t route, std::span<const double> prices) const;

  AllocationVector expand(const RouteDemand& d) const;
  // Inverse of expand on the route cone: reads the departing-edge amounts.
  RouteDemand contract(const AllocationVector& x) const;

 private:
  VehicleRequest request_;
  ConstraintSystem constraints_;
  std::vector<EdgeId> priced_;
  std::vector<std::vector<int>> route_priced_;
  std::vector<double> gram_;
};

// Linear utility v . x restricted to the departing edges, outside and drop.
double utility(const AgentModel& agent, const AllocationVector& x);
double utility(const VehicleRequest& request, const RouteDemand& d);

struct IntegralChoice {
  int route = -1;  // -1 means the drop option
  double outside_units = 0.0;
  double cost = 0.0;  // edge payment p . x
  double utility = 0.0;
};

// Exact integral demand at the given prices (indexed by edge id; removed
// edges carry kUnlimited). Ties go to the higher valuation, then to the
// earlier menu position, with the drop option ranked after every route.
IntegralChoice solve_integral_iop(const AgentModel& agent,
                                  std::span<const double> prices,
                                  double outside_price);

// Route-space form of the x-update. All spans have the agent's route count
// except `gram` (S*S).
struct RouteSubproblem {
  std::span<const double> values;
  double outside_value = 1.0;
  double drop_value = 0.0;
  double weight = 0.0;  // w + omega
  double lambda = 0.0;
  double beta = 1.0;
  double outside_price = 1.0;
  std::span<const double> route_cost;  // C^T p
  std::span<const double> linear;      // C^T y
  std::span<const double> gram;        // C^T C
};

struct SubproblemOptions {
  int max_steps = 500;
  // Projected-gradient tolerance relative to the largest gradient term
  // (at least 1).
  double tolerance = 1e-8;
};

struct SubproblemResult {
  RouteDemand demand;
  double objective = 0.0;  // route-space objective, without constants
  double projected_gradient = 0.0;
  double threshold = 0.0;  // absolute tolerance the gradient met
  // Stopped because no step could decrease the objective measurably,
  // before the gradient test passed.
  bool stalled = false;
  int steps = 0;
};

class SubproblemNotConverged : public ModelError {
 public:
  SubproblemNotConverged(const std::string& what, RouteDemand last)
      : ModelError(what), last_iterate(std::move(last)) {}
  RouteDemand last_iterate;
};

double route_objective(const RouteSubproblem& p, const RouteDemand& z);
// Gradient in (routes..., outside, drop) order.
std::vector<double> route_gradient(const RouteSubproblem& p,
                                   const RouteDemand& z);

// Maximizes the route objective over the non-negative orthant with a
// projected Newton method. `warm` may be null.
SubproblemResult solve_route_subproblem(const RouteSubproblem& p,
                                        const RouteDemand* warm,
                                        const SubproblemOptions& options = {});

// Edge-space inputs of the x-update. `prices` and `expected` are given over
// the agent's priced edges.
struct XUpdateInput {
  double weight = 0.0;
  double lambda = 0.0;
  std::span<const double> expected;  // y_u
  std::span<const double> prices;    // p
  double outside_price = 1.0;
  double beta = 1.0;
};

// Builds the route-space form of an x-update; `cost` and `linear` receive
// the buffers the returned problem points into.
RouteSubproblem route_form(const AgentModel& agent, const XUpdateInput& input,
                           std::vector<double>& cost,
                           std::vector<double>& linear);

SubproblemResult solve_x_update(const AgentModel& agent,
                                const XUpdateInput& input,
                                const RouteDemand* warm = nullptr,
                                const SubproblemOptions& options = {});

// The x-update objective evaluated directly on an edge-space allocation.
// Edges outside the support contribute a constant and are left out.
double x_update_objective(const AgentModel& agent, const XUpdateInput& input,
                          const AllocationVector& x);

}  // namespace airmarket

#endif  // AIRMARKET_AGENTS_HPP_
