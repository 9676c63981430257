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

// Two-loop ADMM for the fractional equilibrium of the airspace Fisher market.
//
// The inner loop alternates agent demand updates, the service provider's
// expected-allocation/surplus update, the price step and the selection
// multiplier step. The outer loop moves the budget adjustments omega to the
// latest multipliers.

#ifndef AIRMARKET_FISHER_ADMM_HPP_
#define AIRMARKET_FISHER_ADMM_HPP_

#include <span>
#include <string>
#include <vector>

#include "airmarket/agents.hpp"
#include "airmarket/timexgraph.hpp"

namespace airmarket {

enum class ExecutionPolicy { kSerial, kParallel };

struct SolverConfig {
  double beta = 50.0;
  int inner_iterations = 30;  // N
  int max_outer = 1000;       // K
  // Absolute tolerances. A non-positive tol_ce selects
  // tol_ce_fraction * ce_scale(market).
  double tol_ce = 0.0;
  double tol_ce_fraction = 1e-3;
  double tol_ice = 1e-4;
  double tol_eae = 1e-3;
  double outside_price = 10.0;
  // Keep lambda and z across outer iterations (p and y always carry).
  bool carry_duals = true;
  // When positive, termination also requires max_u |lambda_u - omega_u| to
  // fall below this value, which makes the output budget-exact.
  double tol_fixed_point = 0.0;
  SubproblemOptions subproblem;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  void validate() const;
};

// Agents plus the capacities they compete for. Capacities are indexed by
// edge id; the default takes them from the graph.
class Market {
 public:
  Market(const TimeExtendedGraph& g, std::vector<AgentModel> agents);
  Market(const TimeExtendedGraph& g, std::vector<AgentModel> agents,
         std::vector<double> capacity);

  const TimeExtendedGraph& graph() const { return *graph_; }
  const std::vector<AgentModel>& agents() const { return agents_; }
  std::size_t num_agents() const { return agents_.size(); }
  const std::vector<double>& capacity() const { return capacity_; }

  // Constrained edges used by at least one agent, sorted.
  const std::vector<EdgeId>& active_edges() const { return active_; }
  // Per agent, position of each priced edge in active_edges().
  const std::vector<std::vector<int>>& agent_columns() const {
    return agent_columns_;
  }
  // CSR over active edges of (agent, priced index) pairs in agent order.
  const std::vector<int>& users_offset() const { return users_offset_; }
  const std::vector<std::pair<int, int>>& users() const { return users_; }

  // Reference scale for the complementarity error: the norm of
  // (p_cap * l_e) over active edges, where p_cap is the largest budget
  // divided by the shortest priced route length.
  double ce_scale() const;

 private:
  void index();

  const TimeExtendedGraph* graph_;
  std::vector<AgentModel> agents_;
  std::vector<double> capacity_;
  std::vector<EdgeId> active_;
  std::vector<std::vector<int>> agent_columns_;
  std::vector<int> users_offset_;
  std::vector<std::pair<int, int>> users_;
};

// Service-provider state over the active edges. Expected allocations are
// y_{u,e} = x_{u,e} - shift_e for every agent.
struct MarketState {
  std::vector<RouteDemand> demand;           // per agent
  std::vector<std::vector<double>> x;        // per agent, over priced edges
  std::vector<double> lambda, omega;         // per agent
  std::vector<double> price, shift, surplus, load;  // per active edge
  int inner = 0;
  int outer = 0;

  static MarketState initial(const Market& market);
  double expected(const Market& market, int agent, int priced_index) const;
};

struct EdgeUpdate {
  double surplus;  // z_e
  double shift;    // d_e, so that y_{u,e} = x_{u,e} - d_e
};

// Closed-form maximizer of the service-provider subproblem on one edge with
// m agents whose demands sum to total.
EdgeUpdate sp_update_edge(double total, int m, double price, double capacity,
                          double beta);

// Vector form: returns y (one entry per agent) and z for one edge.
struct EdgeExpectation {
  std::vector<double> y;
  double z;
};
EdgeExpectation sp_update_y_z(std::span<const double> x, double price,
                              double capacity, double beta);

double sp_update_price(double price, double y_sum, double z, double capacity,
                       double beta);
double sp_update_lambda(double lambda, double selection_sum, double beta);
std::vector<double> outer_update_omega(std::span<const double> lambda);

// Metric helpers over explicit vectors.
double metric_ce(std::span<const double> load, std::span<const double> price,
                 std::span<const double> capacity);
double metric_ice(std::span<const double> selection_sums);
double metric_eae(std::span<const double> shifts);

struct IterationRecord {
  int iteration = 0;
  int outer = 0;
  int inner = 0;
  double ce = 0.0;
  double ice = 0.0;
  double eae = 0.0;
  double max_price = 0.0;
  double omega_max = 0.0;
  double fixed_point = 0.0;  // max_u |lambda_u - omega_u|
};

struct FractionalResult {
  std::vector<RouteDemand> demand;  // per agent
  std::vector<double> prices;       // per graph edge, clamped at zero
  std::vector<double> lambda, omega;
  bool converged = false;
  int iterations = 0;
  int outer_iterations = 0;
  double tol_ce = 0.0;
  std::vector<IterationRecord> trace;
};

// One inner iteration (demand, SP, price and multiplier updates) followed by
// metric evaluation. Exposed for testing and benchmarking.
IterationRecord inner_step(const Market& market, MarketState& state,
                           const SolverConfig& config);

// Agent-parallel x-update kernel and edge-parallel SP kernel.
void demand_kernel(const Market& market, MarketState& state,
                   const SolverConfig& config, ExecutionPolicy policy);
void edge_kernel(const Market& market, MarketState& state, double beta,
                 ExecutionPolicy policy);

FractionalResult run_algorithm1(const Market& market,
                                const SolverConfig& config);

}  // namespace airmarket

#endif  // AIRMARKET_FISHER_ADMM_HPP_
