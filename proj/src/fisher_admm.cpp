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

#include "airmarket/fisher_admm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

namespace airmarket {

void SolverConfig::validate() const {
  if (!(beta > 0.0)) throw ModelError("beta must be positive");
  if (inner_iterations < 1 || max_outer < 1) {
    throw ModelError("iteration limits must be at least 1");
  }
  if (!(tol_ice > 0.0) || !(tol_eae > 0.0)) {
    throw ModelError("tolerances must be positive");
  }
  if (!(tol_ce > 0.0) && !(tol_ce_fraction > 0.0)) {
    throw ModelError("a positive CE tolerance or fraction is required");
  }
  if (!(outside_price > 0.0)) throw ModelError("outside price must be positive");
  if (tol_fixed_point < 0.0) throw ModelError("negative fixed-point tolerance");
}

// ---------------------------------------------------------------------------
// Market

Market::Market(const TimeExtendedGraph& g, std::vector<AgentModel> agents)
    : Market(g, std::move(agents), g.capacities()) {}

Market::Market(const TimeExtendedGraph& g, std::vector<AgentModel> agents,
               std::vector<double> capacity)
    : graph_(&g), agents_(std::move(agents)), capacity_(std::move(capacity)) {
  if (capacity_.size() != static_cast<std::size_t>(g.num_edges())) {
    throw ModelError("capacity vector does not match the graph");
  }
  for (EdgeId e = 0; e < g.num_constrained(); ++e) {
    if (!std::isfinite(capacity_[e]) || capacity_[e] < 0.0) {
      throw ModelError("constrained edge with invalid capacity");
    }
  }
  index();
}

void Market::index() {
  std::set<EdgeId> used;
  for (const AgentModel& a : agents_) {
    used.insert(a.priced_edges().begin(), a.priced_edges().end());
  }
  active_.assign(used.begin(), used.end());
  agent_columns_.assign(agents_.size(), {});
  std::vector<int> count(active_.size() + 1, 0);
  for (std::size_t u = 0; u < agents_.size(); ++u) {
    for (EdgeId e : agents_[u].priced_edges()) {
      const int j = static_cast<int>(
          std::lower_bound(active_.begin(), active_.end(), e) - active_.begin());
      agent_columns_[u].push_back(j);
      ++count[j + 1];
    }
  }
  for (std::size_t j = 0; j < active_.size(); ++j) count[j + 1] += count[j];
  users_offset_ = count;
  users_.assign(count.back(), {0, 0});
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (std::size_t u = 0; u < agents_.size(); ++u) {
    const auto& cols = agent_columns_[u];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      users_[fill[cols[k]]++] = {static_cast<int>(u), static_cast<int>(k)};
    }
  }
}

double Market::ce_scale() const {
  double max_budget = 0.0;
  std::size_t min_len = 0;
  for (const AgentModel& a : agents_) {
    max_budget = std::max(max_budget, a.request().budget);
    for (const auto& r : a.route_priced()) {
      if (!r.empty() && (min_len == 0 || r.size() < min_len)) min_len = r.size();
    }
  }
  if (min_len == 0) return 1.0;
  const double p_cap = std::max(max_budget, 1.0) / static_cast<double>(min_len);
  double s = 0.0;
  for (EdgeId e : active_) s += (p_cap * capacity_[e]) * (p_cap * capacity_[e]);
  return std::max(std::sqrt(s), p_cap);
}

// ---------------------------------------------------------------------------
// State

MarketState MarketState::initial(const Market& market) {
  MarketState s;
  const std::size_t U = market.num_agents();
  const std::size_t E = market.active_edges().size();
  s.demand.resize(U);
  s.x.resize(U);
  for (std::size_t u = 0; u < U; ++u) {
    const AgentModel& a = market.agents()[u];
    s.demand[u].routes.assign(a.num_routes(), 0.0);
    s.demand[u].drop = 1.0;
    s.x[u].assign(a.priced_edges().size(), 0.0);
  }
  s.lambda.assign(U, 0.0);
  s.omega.assign(U, 0.0);
  s.price.assign(E, 0.0);
  s.shift.assign(E, 0.0);
  s.load.assign(E, 0.0);
  s.surplus.resize(E);
  for (std::size_t j = 0; j < E; ++j) {
    s.surplus[j] = market.capacity()[market.active_edges()[j]];
  }
  return s;
}

double MarketState::expected(const Market& market, int agent,
                             int priced_index) const {
  const int j = market.agent_columns()[agent][priced_index];
  return x[agent][priced_index] - shift[j];
}

// ---------------------------------------------------------------------------
// Closed-form pieces

EdgeUpdate sp_update_edge(double total, int m, double price, double capacity,
                          double beta) {
  if (!std::isfinite(total) || !std::isfinite(price) ||
      !std::isfinite(capacity) || !(beta > 0.0) || m < 0) {
    throw ModelError("sp_update_edge: invalid input");
  }
  const double mp1 = static_cast<double>(m + 1);
  const double z = std::max(0.0, capacity - total - mp1 * price / beta);
  return {z, (total + z - capacity) / mp1};
}

EdgeExpectation sp_update_y_z(std::span<const double> x, double price,
                              double capacity, double beta) {
  double total = 0.0;
  for (double v : x) total += v;
  const EdgeUpdate u =
      sp_update_edge(total, static_cast<int>(x.size()), price, capacity, beta);
  EdgeExpectation out;
  out.z = u.surplus;
  for (double v : x) out.y.push_back(v - u.shift);
  return out;
}

double sp_update_price(double price, double y_sum, double z, double capacity,
                       double beta) {
  return price + beta * (y_sum + z - capacity);
}

double sp_update_lambda(double lambda, double selection_sum, double beta) {
  return lambda + beta * (selection_sum - 1.0);
}

std::vector<double> outer_update_omega(std::span<const double> lambda) {
  std::vector<double> w(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) w[i] = std::max(0.0, lambda[i]);
  return w;
}

double metric_ce(std::span<const double> load, std::span<const double> price,
                 std::span<const double> capacity) {
  double s = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    const double t = price[i] * (load[i] - capacity[i]);
    s += t * t;
  }
  return std::sqrt(s);
}

double metric_ice(std::span<const double> selection_sums) {
  double worst = 0.0;
  for (double v : selection_sums) worst = std::max(worst, std::abs(v - 1.0));
  return worst;
}

double metric_eae(std::span<const double> shifts) {
  double worst = 0.0;
  for (double v : shifts) worst = std::max(worst, std::abs(v));
  return worst;
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

void solve_agent(const Market& market, MarketState& state,
                 const SolverConfig& config, std::size_t u,
                 std::vector<double>& p_buf, std::vector<double>& y_buf) {
  const AgentModel& agent = market.agents()[u];
  const auto& cols = market.agent_columns()[u];
  const std::size_t P = cols.size();
  p_buf.resize(P);
  y_buf.resize(P);
  for (std::size_t k = 0; k < P; ++k) {
    p_buf[k] = state.price[cols[k]];
    y_buf[k] = state.x[u][k] - state.shift[cols[k]];
  }
  XUpdateInput in;
  in.weight = agent.request().budget + state.omega[u];
  in.lambda = state.lambda[u];
  in.expected = y_buf;
  in.prices = p_buf;
  in.outside_price = config.outside_price;
  in.beta = config.beta;
  SubproblemResult r =
      solve_x_update(agent, in, &state.demand[u], config.subproblem);
  std::vector<double>& x = state.x[u];
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t s = 0; s < agent.num_routes(); ++s) {
    for (int k : agent.route_priced()[s]) x[k] += r.demand.routes[s];
  }
  state.demand[u] = std::move(r.demand);
}

void update_edge(const Market& market, MarketState& state, double beta,
                 std::size_t j, int m) {
  const auto& users = market.users();
  double total = 0.0;
  for (int i = market.users_offset()[j]; i < market.users_offset()[j + 1]; ++i) {
    total += state.x[users[i].first][users[i].second];
  }
  const double cap = market.capacity()[market.active_edges()[j]];
  const EdgeUpdate up = sp_update_edge(total, m, state.price[j], cap, beta);
  state.load[j] = total;
  state.surplus[j] = up.surplus;
  state.shift[j] = up.shift;
  // sum_u y_u + z - l equals the shift itself.
  state.price[j] += beta * up.shift;
}

}  // namespace

void demand_kernel(const Market& market, MarketState& state,
                   const SolverConfig& config, ExecutionPolicy policy) {
  const std::ptrdiff_t U = static_cast<std::ptrdiff_t>(market.num_agents());
  if (policy == ExecutionPolicy::kSerial) {
    std::vector<double> p_buf, y_buf;
    for (std::ptrdiff_t u = 0; u < U; ++u) {
      solve_agent(market, state, config, u, p_buf, y_buf);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(U);
#pragma omp parallel
  {
    std::vector<double> p_buf, y_buf;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t u = 0; u < U; ++u) {
      try {
        solve_agent(market, state, config, u, p_buf, y_buf);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void edge_kernel(const Market& market, MarketState& state, double beta,
                 ExecutionPolicy policy) {
  const std::ptrdiff_t E =
      static_cast<std::ptrdiff_t>(market.active_edges().size());
  const int m = static_cast<int>(market.num_agents());
  if (policy == ExecutionPolicy::kSerial) {
    for (std::ptrdiff_t j = 0; j < E; ++j) update_edge(market, state, beta, j, m);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < E; ++j) update_edge(market, state, beta, j, m);
}

IterationRecord inner_step(const Market& market, MarketState& state,
                           const SolverConfig& config) {
  demand_kernel(market, state, config, config.policy);
  edge_kernel(market, state, config.beta, config.policy);

  IterationRecord rec;
  rec.outer = state.outer;
  rec.inner = state.inner;
  double ice = 0.0, fp = 0.0, omax = 0.0;
  for (std::size_t u = 0; u < market.num_agents(); ++u) {
    const RouteDemand& d = state.demand[u];
    double sel = d.drop;
    for (double v : d.routes) sel += v;
    state.lambda[u] = sp_update_lambda(state.lambda[u], sel, config.beta);
    ice = std::max(ice, std::abs(sel - 1.0));
    fp = std::max(fp, std::abs(state.lambda[u] - state.omega[u]));
    omax = std::max(omax, state.omega[u]);
  }
  double ce2 = 0.0, eae = 0.0, pmax = 0.0;
  for (std::size_t j = 0; j < market.active_edges().size(); ++j) {
    const double cap = market.capacity()[market.active_edges()[j]];
    const double t = state.price[j] * (state.load[j] - cap);
    ce2 += t * t;
    eae = std::max(eae, std::abs(state.shift[j]));
    pmax = std::max(pmax, state.price[j]);
  }
  rec.ce = std::sqrt(ce2);
  rec.ice = ice;
  rec.eae = eae;
  rec.max_price = pmax;
  rec.omega_max = omax;
  rec.fixed_point = fp;
  ++state.inner;
  return rec;
}

FractionalResult run_algorithm1(const Market& market,
                                const SolverConfig& config) {
  config.validate();
  FractionalResult out;
  out.tol_ce = config.tol_ce > 0.0 ? config.tol_ce
                                   : config.tol_ce_fraction * market.ce_scale();
  MarketState state = MarketState::initial(market);
  int iteration = 0;
  for (int k = 0; k < config.max_outer && !out.converged; ++k) {
    state.outer = k;
    state.inner = 0;
    for (int n = 0; n < config.inner_iterations; ++n) {
      IterationRecord rec = inner_step(market, state, config);
      rec.iteration = ++iteration;
      out.trace.push_back(rec);
      const bool fixed_point =
          config.tol_fixed_point <= 0.0 || rec.fixed_point <= config.tol_fixed_point;
      if (rec.ce <= out.tol_ce && rec.ice <= config.tol_ice &&
          rec.eae <= config.tol_eae && fixed_point) {
        out.converged = true;
        break;
      }
    }
    out.outer_iterations = k + 1;
    if (out.converged) break;
    state.omega = outer_update_omega(state.lambda);
    if (!config.carry_duals) {
      std::fill(state.lambda.begin(), state.lambda.end(), 0.0);
      for (std::size_t j = 0; j < state.surplus.size(); ++j) {
        state.surplus[j] = market.capacity()[market.active_edges()[j]];
      }
    }
  }
  out.iterations = iteration;
  out.demand = state.demand;
  out.lambda = state.lambda;
  out.omega = state.omega;
  out.prices.assign(market.graph().num_edges(), 0.0);
  for (std::size_t j = 0; j < market.active_edges().size(); ++j) {
    out.prices[market.active_edges()[j]] = std::max(0.0, state.price[j]);
  }
  return out;
}

}  // namespace airmarket
