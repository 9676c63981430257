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

#include "airmarket/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "airmarket/nnls.hpp"

namespace airmarket {

RelaxedOptimum relaxed_optimum(const AgentModel& agent,
                               std::span<const double> prices, double p_o) {
  if (!(p_o > 0.0)) throw ModelError("outside price must be positive");
  const VehicleRequest& r = agent.request();
  const std::size_t S = agent.num_routes();
  const double w = r.budget;
  // Options 0..S-1 are routes, S is the drop option (free).
  std::vector<double> cost(S + 1, 0.0), value(S + 1, r.drop_value);
  for (std::size_t s = 0; s < S; ++s) {
    cost[s] = agent.route_cost(s, prices);
    value[s] = r.values[s];
  }
  RelaxedOptimum best;
  best.utility = -1.0;
  auto consider = [&](double u, std::size_t i, double ti, std::size_t j,
                      double tj, double outside) {
    if (u <= best.utility) return;
    best.utility = u;
    best.demand.routes.assign(S, 0.0);
    best.demand.drop = 0.0;
    auto put = [&](std::size_t k, double t) {
      if (k == S) {
        best.demand.drop += t;
      } else {
        best.demand.routes[k] += t;
      }
    };
    put(i, ti);
    put(j, tj);
    best.demand.outside = outside;
  };
  for (std::size_t i = 0; i <= S; ++i) {
    if (!std::isfinite(cost[i]) || cost[i] > w) continue;
    const double outside = (w - cost[i]) / p_o;
    consider(value[i] + r.outside_value * outside, i, 1.0, i, 0.0, outside);
  }
  // Mixtures of a cheap and an expensive option that spend the budget.
  for (std::size_t i = 0; i <= S; ++i) {
    for (std::size_t j = 0; j <= S; ++j) {
      if (!std::isfinite(cost[i]) || !std::isfinite(cost[j])) continue;
      if (!(cost[i] < w && w < cost[j])) continue;
      const double tj = (w - cost[i]) / (cost[j] - cost[i]);
      consider(value[i] * (1.0 - tj) + value[j] * tj, i, 1.0 - tj, j, tj, 0.0);
    }
  }
  return best;
}

namespace {

AgentCertificate certify_agent(const AgentModel& agent,
                               const AllocationVector& x,
                               std::span<const double> prices, double p_o,
                               double tol) {
  const VehicleRequest& req = agent.request();
  const ConstraintSystem& cs = agent.constraints();
  const Eigen::Index P = static_cast<Eigen::Index>(cs.support.size());
  const Eigen::Index n = P + 2;
  const Eigen::Index R = static_cast<Eigen::Index>(cs.rows.size());
  AgentCertificate c;

  Eigen::VectorXd xv(n), v = Eigen::VectorXd::Zero(n), price(n), sel(n);
  for (Eigen::Index k = 0; k < P; ++k) {
    xv[k] = x.edges[k];
    price[k] = prices[cs.support[k]];
    sel[k] = cs.selection[k];
  }
  xv[P] = x.outside;
  xv[P + 1] = x.drop;
  price[P] = p_o;
  price[P + 1] = 0.0;
  sel[P] = 0.0;
  sel[P + 1] = 1.0;
  for (std::size_t s = 0; s < agent.num_routes(); ++s) {
    v[cs.departing_column[s]] = req.values[s];
  }
  v[P] = req.outside_value;
  v[P + 1] = req.drop_value;
  const double vscale = std::max(1.0, v.cwiseAbs().maxCoeff());

  const double spend = price.dot(xv);
  c.budget_residual = std::abs(spend - req.budget);
  c.utility = v.dot(xv);
  c.optimum = relaxed_optimum(agent, prices, p_o).utility;
  c.gap = (c.optimum - c.utility) / std::max(1.0, std::abs(c.optimum));

  std::vector<double> xs(x.edges.begin(), x.edges.end());
  c.feasibility = std::max(cs.max_row_residual(xs),
                           std::abs(sel.dot(xv) - 1.0));
  c.feasibility = std::max(c.feasibility, -xv.minCoeff());

  // Stationarity v = w~ price + l~ sel + A^T kappa - mu with w~, mu >= 0.
  // The free multipliers (l~, kappa) are projected out, the sign-constrained
  // ones fitted by NNLS on the projected system.
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, 1 + R);
  F.col(0) = sel;
  for (Eigen::Index i = 0; i < R; ++i) {
    for (const auto& [col, coef] : cs.rows[i].terms) F(col, 1 + i) = coef;
  }
  std::vector<Eigen::Index> bound;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (xv[i] <= tol) bound.push_back(i);
  }
  const Eigen::Index B = static_cast<Eigen::Index>(bound.size());
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n, 1 + B);
  N.col(0) = price;
  for (Eigen::Index k = 0; k < B; ++k) N(bound[k], 1 + k) = -1.0;

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(F);
  const Eigen::VectorXd pb = v - F * cod.solve(v);
  const Eigen::MatrixXd pN = N - F * cod.solve(N);
  const NnlsResult g = solve_nnls(pN, pb);
  const Eigen::VectorXd free = cod.solve(v - N * g.solution);
  const Eigen::VectorXd residual = v - F * free - N * g.solution;
  c.stationarity = residual.cwiseAbs().maxCoeff() / vscale;

  c.budget_multiplier = g.solution[0];
  c.selection_multiplier = free[0];
  c.kappa.assign(free.data() + 1, free.data() + free.size());
  c.mu.assign(n, 0.0);
  double slack = c.budget_multiplier * std::abs(req.budget - spend);
  for (Eigen::Index k = 0; k < B; ++k) {
    c.mu[bound[k]] = g.solution[1 + k];
    slack = std::max(slack, std::abs(g.solution[1 + k] * xv[bound[k]]));
  }
  c.slackness = slack / vscale;
  return c;
}

}  // namespace

std::string KktCertificate::first_failure() const {
  if (!capacity_ok()) return "a";
  if (!complementarity_ok()) return "b";
  if (!optimality_ok()) return "c";
  if (!budget_ok()) return "d";
  return "";
}

double KktCertificate::max_residual() const {
  return std::max({capacity_residual, complementarity_residual,
                   optimality_residual, budget_residual});
}

KktCertificate verify_fractional_ce(const Market& market,
                                    std::span<const AllocationVector> allocations,
                                    std::span<const double> prices,
                                    double outside_price, VerifyTolerance tol) {
  const TimeExtendedGraph& g = market.graph();
  if (allocations.size() != market.num_agents() ||
      prices.size() != static_cast<std::size_t>(g.num_edges())) {
    throw ModelError("verifier inputs do not match the market");
  }
  for (double p : prices) {
    if (!(p >= 0.0)) throw ModelError("verifier needs nonnegative prices");
  }
  KktCertificate out;
  out.tol = tol.allocation;
  out.credit_tol = tol.credits;
  std::vector<double> load(g.num_constrained(), 0.0);
  for (std::size_t u = 0; u < market.num_agents(); ++u) {
    const AgentModel& agent = market.agents()[u];
    const auto& support = agent.constraints().support;
    if (allocations[u].edges.size() != support.size()) {
      throw ModelError("allocation of agent " + agent.request().id +
                       " has the wrong dimension");
    }
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (g.edge(support[k]).constrained()) load[support[k]] += allocations[u].edges[k];
    }
  }
  out.capacity_residual = -kUnlimited;
  for (EdgeId e = 0; e < g.num_constrained(); ++e) {
    const double excess = load[e] - market.capacity()[e];
    if (excess > out.capacity_residual) {
      out.capacity_residual = excess;
      out.worst_capacity_edge = e;
    }
    const double comp = std::abs(prices[e] * excess);
    if (comp > out.complementarity_residual) {
      out.complementarity_residual = comp;
      out.worst_complementarity_edge = e;
    }
  }
  out.capacity_residual = std::max(out.capacity_residual, 0.0);
  for (std::size_t u = 0; u < market.num_agents(); ++u) {
    AgentCertificate c = certify_agent(market.agents()[u], allocations[u],
                                       prices, outside_price, tol.allocation);
    const double opt = std::max({c.gap, c.feasibility, c.stationarity, c.slackness});
    if (opt > out.optimality_residual) {
      out.optimality_residual = opt;
      out.worst_optimality_agent = static_cast<int>(u);
    }
    if (c.budget_residual > out.budget_residual) {
      out.budget_residual = c.budget_residual;
      out.worst_budget_agent = static_cast<int>(u);
    }
    out.agents.push_back(std::move(c));
  }
  return out;
}

KktCertificate verify_fractional_ce(const Market& market,
                                    std::span<const AllocationVector> allocations,
                                    std::span<const double> prices,
                                    double outside_price, double tol) {
  return verify_fractional_ce(market, allocations, prices, outside_price,
                              VerifyTolerance{tol, tol});
}

KktCertificate verify_fractional_ce(const Market& market,
                                    const FractionalResult& result,
                                    double outside_price, double tol) {
  std::vector<AllocationVector> x;
  for (std::size_t u = 0; u < market.num_agents(); ++u) {
    x.push_back(market.agents()[u].expand(result.demand[u]));
  }
  return verify_fractional_ce(market, x, result.prices, outside_price, tol);
}

}  // namespace airmarket
