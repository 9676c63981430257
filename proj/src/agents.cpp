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

#include "airmarket/agents.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

namespace airmarket {
namespace {

constexpr double kLogFloor = 1e-12;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void VehicleRequest::validate() const {
  if (menu.empty()) throw ModelError("request '" + id + "' has an empty menu");
  if (values.size() != menu.size()) {
    throw ModelError("request '" + id + "': one valuation per route expected");
  }
  if (preferred >= menu.size()) {
    throw ModelError("request '" + id + "': preferred route out of range");
  }
  for (double v : values) {
    if (!finite_nonneg(v)) {
      throw ModelError("request '" + id + "': negative route valuation");
    }
  }
  if (!finite_nonneg(drop_value) || !finite_nonneg(outside_value)) {
    throw ModelError("request '" + id + "': negative drop or outside value");
  }
  if (!finite_nonneg(budget)) {
    throw ModelError("request '" + id + "': negative budget");
  }
}

AgentModel::AgentModel(const TimeExtendedGraph& g, VehicleRequest request)
    : request_(std::move(request)) {
  request_.validate();
  constraints_ = build_constraints(g, request_.menu);
  for (EdgeId e : constraints_.support) {
    if (g.edge(e).constrained()) priced_.push_back(e);
  }
  std::map<EdgeId, int> index;
  for (std::size_t i = 0; i < priced_.size(); ++i) {
    index[priced_[i]] = static_cast<int>(i);
  }
  const std::size_t S = request_.menu.size();
  route_priced_.resize(S);
  std::vector<std::vector<char>> member(S, std::vector<char>(priced_.size(), 0));
  for (std::size_t s = 0; s < S; ++s) {
    for (EdgeId e : request_.menu[s].edges) {
      auto it = index.find(e);
      if (it == index.end()) continue;
      route_priced_[s].push_back(it->second);
      member[s][it->second] = 1;
    }
  }
  gram_.assign(S * S, 0.0);
  for (std::size_t a = 0; a < S; ++a) {
    for (std::size_t b = 0; b < S; ++b) {
      double n = 0;
      for (std::size_t k = 0; k < priced_.size(); ++k) {
        n += member[a][k] && member[b][k];
      }
      gram_[a * S + b] = n;
    }
  }
}

double AgentModel::route_cost(std::size_t route,
                              std::span<const double> prices) const {
  double c = 0.0;
  for (int k : route_priced_.at(route)) c += prices[priced_[k]];
  return c;
}

AllocationVector AgentModel::expand(const RouteDemand& d) const {
  if (d.routes.size() != num_routes()) {
    throw ModelError("route demand has wrong dimension");
  }
  AllocationVector x;
  x.edges.assign(constraints_.support.size(), 0.0);
  for (std::size_t s = 0; s < num_routes(); ++s) {
    for (int c : constraints_.route_columns[s]) x.edges[c] += d.routes[s];
  }
  x.outside = d.outside;
  x.drop = d.drop;
  return x;
}

RouteDemand AgentModel::contract(const AllocationVector& x) const {
  if (x.edges.size() != constraints_.support.size()) {
    throw ModelError("allocation has wrong dimension");
  }
  RouteDemand d;
  for (int c : constraints_.departing_column) d.routes.push_back(x.edges[c]);
  d.outside = x.outside;
  d.drop = x.drop;
  return d;
}

double utility(const AgentModel& agent, const AllocationVector& x) {
  return utility(agent.request(), agent.contract(x));
}

double utility(const VehicleRequest& request, const RouteDemand& d) {
  if (d.routes.size() != request.values.size()) {
    throw ModelError("route demand has wrong dimension");
  }
  double u = request.outside_value * d.outside + request.drop_value * d.drop;
  for (std::size_t s = 0; s < d.routes.size(); ++s) {
    u += request.values[s] * d.routes[s];
  }
  return u;
}

IntegralChoice solve_integral_iop(const AgentModel& agent,
                                  std::span<const double> prices,
                                  double outside_price) {
  const VehicleRequest& r = agent.request();
  if (!(outside_price > 0.0)) throw ModelError("outside price must be positive");
  IntegralChoice best;
  best.route = -1;
  best.outside_units = r.budget / outside_price;
  best.utility = r.drop_value + r.outside_value * best.outside_units;
  double best_value = r.drop_value;
  bool have_route = false;
  for (std::size_t s = 0; s < r.menu.size(); ++s) {
    const double cost = agent.route_cost(s, prices);
    if (!std::isfinite(cost) || cost > r.budget) continue;
    const double left = (r.budget - cost) / outside_price;
    const double score = r.values[s] + r.outside_value * left;
    bool take = score > best.utility;
    if (score == best.utility) {
      // Routes precede the drop option; among routes prefer higher value.
      take = !have_route ? r.values[s] >= best_value : r.values[s] > best_value;
    }
    if (take) {
      best.route = static_cast<int>(s);
      best.outside_units = left;
      best.cost = cost;
      best.utility = score;
      best_value = r.values[s];
      have_route = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// x-update

namespace {


Eigen::VectorXd pack(const RouteDemand& d) {
  const Eigen::Index S = static_cast<Eigen::Index>(d.routes.size());
  Eigen::VectorXd z(S + 2);
  for (Eigen::Index s = 0; s < S; ++s) z[s] = d.routes[s];
  z[S] = d.outside;
  z[S + 1] = d.drop;
  return z;
}

RouteDemand unpack(const Eigen::VectorXd& z) {
  const Eigen::Index S = z.size() - 2;
  RouteDemand d;
  d.routes.assign(z.data(), z.data() + S);
  d.outside = z[S];
  d.drop = z[S + 1];
  return d;
}

class Objective {
 public:
  explicit Objective(const RouteSubproblem& p)
      : p_(p), S_(static_cast<Eigen::Index>(p.values.size())) {
    a_.resize(S_ + 2);
    for (Eigen::Index s = 0; s < S_; ++s) a_[s] = p.values[s];
    a_[S_] = p.outside_value;
    a_[S_ + 1] = p.drop_value;
    G_.resize(S_, S_);
    for (Eigen::Index i = 0; i < S_; ++i) {
      for (Eigen::Index j = 0; j < S_; ++j) G_(i, j) = p.gram[i * S_ + j];
    }
  }

  // Value of the (maximized) objective.
  double value(const Eigen::VectorXd& z) const {
    const double f = a_.dot(z);
    const double g = gap(z);
    double F = 0.0;
    if (p_.weight > 0.0) F += p_.weight * std::log(std::max(f, kLogFloor));
    F -= p_.outside_price * z[S_];
    const auto th = z.head(S_);
    for (Eigen::Index s = 0; s < S_; ++s) {
      F += (p_.beta * p_.linear[s] - p_.route_cost[s]) * th[s];
    }
    F -= p_.lambda * g + 0.5 * p_.beta * g * g;
    F -= 0.5 * p_.beta * th.dot(G_ * th);
    return F;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    const double f = std::max(a_.dot(z), kLogFloor);
    const double g = gap(z);
    const double w = p_.weight > 0.0 ? p_.weight / f : 0.0;
    Eigen::VectorXd grad = w * a_;
    const Eigen::VectorXd Gth = G_ * z.head(S_);
    for (Eigen::Index s = 0; s < S_; ++s) {
      grad[s] += -p_.route_cost[s] + p_.beta * p_.linear[s] - p_.lambda -
                 p_.beta * g - p_.beta * Gth[s];
    }
    grad[S_] -= p_.outside_price;
    grad[S_ + 1] += -p_.lambda - p_.beta * g;
    return grad;
  }

  // Hessian of the negated objective (positive semidefinite).
  Eigen::MatrixXd curvature(const Eigen::VectorXd& z) const {
    const Eigen::Index n = S_ + 2;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    if (p_.weight > 0.0) {
      const double f = std::max(a_.dot(z), kLogFloor);
      H += (p_.weight / (f * f)) * a_ * a_.transpose();
    }
    Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
    e[S_] = 0.0;
    H += p_.beta * e * e.transpose();
    H.topLeftCorner(S_, S_) += p_.beta * G_;
    return H;
  }

  // Largest magnitude among the terms summed into the gradient at z. The
  // stopping test is relative to it, since roundoff in the gradient grows
  // with the budget weight, the multiplier and the prices.
  double scale(const Eigen::VectorXd& z) const {
    const double f = std::max(a_.dot(z), kLogFloor);
    double m = p_.weight > 0.0 ? p_.weight / f * a_.cwiseAbs().maxCoeff() : 0.0;
    const double g = std::abs(gap(z));
    const Eigen::VectorXd Gth = G_ * z.head(S_);
    for (Eigen::Index s = 0; s < S_; ++s) {
      m = std::max({m, std::abs(p_.route_cost[s]), p_.beta * std::abs(p_.linear[s]),
                    p_.beta * Gth[s]});
    }
    return std::max({m, std::abs(p_.lambda), p_.beta * g, p_.outside_price});
  }

  Eigen::Index routes() const { return S_; }

 private:
  double gap(const Eigen::VectorXd& z) const {
    return z.head(S_).sum() + z[S_ + 1] - 1.0;
  }

  const RouteSubproblem& p_;
  Eigen::Index S_;
  Eigen::VectorXd a_;
  Eigen::MatrixXd G_;
};

double projected_gradient_norm(const Eigen::VectorXd& z,
                               const Eigen::VectorXd& ascent) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double step = std::max(0.0, z[i] + ascent[i]) - z[i];
    worst = std::max(worst, std::abs(step));
  }
  return worst;
}

void check_subproblem(const RouteSubproblem& p) {
  const std::size_t S = p.values.size();
  if (S == 0 || p.route_cost.size() != S || p.linear.size() != S ||
      p.gram.size() != S * S) {
    throw ModelError("route subproblem has inconsistent dimensions");
  }
  if (!(p.beta > 0.0) || !(p.outside_price > 0.0) || !(p.weight >= 0.0)) {
    throw ModelError("route subproblem needs beta > 0, p_o > 0, weight >= 0");
  }
}

}  // namespace

double route_objective(const RouteSubproblem& p, const RouteDemand& z) {
  check_subproblem(p);
  return Objective(p).value(pack(z));
}

std::vector<double> route_gradient(const RouteSubproblem& p,
                                   const RouteDemand& z) {
  check_subproblem(p);
  const Eigen::VectorXd g = Objective(p).gradient(pack(z));
  return {g.data(), g.data() + g.size()};
}

SubproblemResult solve_route_subproblem(const RouteSubproblem& p,
                                        const RouteDemand* warm,
                                        const SubproblemOptions& options) {
  check_subproblem(p);
  const Objective obj(p);
  const Eigen::Index S = obj.routes();
  const Eigen::Index n = S + 2;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  z[S + 1] = 1.0;
  if (warm != nullptr && warm->routes.size() == static_cast<std::size_t>(S)) {
    z = pack(*warm).cwiseMax(0.0);
    // Keep log(f) finite at the start point.
    Eigen::VectorXd a(n);
    for (Eigen::Index s = 0; s < S; ++s) a[s] = p.values[s];
    a[S] = p.outside_value;
    a[S + 1] = p.drop_value;
    if (p.weight > 0.0 && a.dot(z) <= kLogFloor) z[S + 1] = 1.0;
  }

  constexpr double kArmijo = 1e-4;
  constexpr double kActiveWindow = 1e-3;
  double phi = -obj.value(z);
  SubproblemResult result;
  for (int step = 0;; ++step) {
    const Eigen::VectorXd grad = -obj.gradient(z);  // of the minimized form
    const double pg = projected_gradient_norm(z, -grad);
    result.steps = step;
    result.projected_gradient = pg;
    const double tol = options.tolerance * std::max(1.0, obj.scale(z));
    result.threshold = tol;
    if (pg <= tol) break;
    if (step >= options.max_steps) {
      throw SubproblemNotConverged("x-update did not converge", unpack(z));
    }
    const double eps = std::min(kActiveWindow, pg);
    const Eigen::MatrixXd H = obj.curvature(z);
    std::vector<Eigen::Index> free_idx;
    std::vector<char> active(n, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      active[i] = z[i] <= eps && grad[i] > 0.0;
      if (!active[i]) free_idx.push_back(i);
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    const double diag_floor = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) d[i] = -grad[i] / std::max(H(i, i), diag_floor);
    }
    if (!free_idx.empty()) {
      const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Hf(m, m);
      Eigen::VectorXd gf(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        gf[a] = grad[free_idx[a]];
        for (Eigen::Index b = 0; b < m; ++b) {
          Hf(a, b) = H(free_idx[a], free_idx[b]);
        }
      }
      Hf.diagonal().array() += diag_floor;
      const Eigen::VectorXd df = Hf.ldlt().solve(-gf);
      for (Eigen::Index a = 0; a < m; ++a) d[free_idx[a]] = df[a];
    }

    // Backtracking along the projection arc z(alpha) = [z + alpha d]_+.
    // Coordinates flagged in `arc` use the projected decrease in the
    // sufficient-decrease test, the others the linear prediction.
    auto search = [&](const Eigen::VectorXd& dir, const std::vector<char>& arc) {
      double alpha = 1.0;
      for (int trial = 0; trial < 60; ++trial, alpha *= 0.5) {
        const Eigen::VectorXd cand = (z + alpha * dir).cwiseMax(0.0);
        double predicted = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          predicted += arc[i] ? grad[i] * (z[i] - cand[i])
                              : -alpha * grad[i] * dir[i];
        }
        const double next = -obj.value(cand);
        if (phi - next >= kArmijo * predicted && std::isfinite(next)) {
          z = cand;
          phi = next;
          return true;
        }
      }
      return false;
    };
    // Try the Newton step on the face where active coordinates sit at zero:
    // it reaches bounds that curvature-scaled steps approach only slowly.
    if (!free_idx.empty() && free_idx.size() < static_cast<std::size_t>(n)) {
      Eigen::VectorXd face = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active[i]) face[i] = -z[i];
      }
      const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd Hf(m, m);
      Eigen::VectorXd rhs(m);
      const Eigen::VectorXd shift = H * face;
      for (Eigen::Index a = 0; a < m; ++a) {
        rhs[a] = -grad[free_idx[a]] - shift[free_idx[a]];
        for (Eigen::Index b = 0; b < m; ++b) {
          Hf(a, b) = H(free_idx[a], free_idx[b]);
        }
      }
      Hf.diagonal().array() += diag_floor;
      const Eigen::VectorXd df = Hf.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) face[free_idx[a]] = df[a];
      const Eigen::VectorXd cand = (z + face).cwiseMax(0.0);
      const double next = -obj.value(cand);
      if (std::isfinite(next) && next < phi) {
        z = cand;
        phi = next;
        continue;
      }
    }
    if (search(d, active)) continue;
    {
      // Below the resolution of the objective the decrease test is noise;
      // take the full step when it shrinks the projected gradient.
      const Eigen::VectorXd cand = (z + d).cwiseMax(0.0);
      const double cand_pg = projected_gradient_norm(cand, obj.gradient(cand));
      if (cand_pg < pg && std::abs(phi + obj.value(cand)) <=
                              1e-9 * (1.0 + std::abs(phi))) {
        z = cand;
        phi = -obj.value(z);
        continue;
      }
    }
    {
      // A full step whose predicted decrease is below the resolution of the
      // objective cannot be verified; the iterate is optimal to roundoff.
      const Eigen::VectorXd cand = (z + d).cwiseMax(0.0);
      double predicted = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) predicted += grad[i] * (z[i] - cand[i]);
      if (predicted <= 1e-12 * (1.0 + std::abs(phi))) {
        result.stalled = true;
        break;
      }
    }
    // The Newton direction ignores how moving active coordinates shifts the
    // free ones; fall back to a scaled projected-gradient step.
    const Eigen::VectorXd steepest = -grad / std::max(H.diagonal().maxCoeff(), diag_floor);
    if (search(steepest, std::vector<char>(n, 1))) continue;
    throw SubproblemNotConverged("x-update line search failed", unpack(z));
  }
  result.demand = unpack(z);
  result.objective = -phi;
  return result;
}

RouteSubproblem route_form(const AgentModel& agent, const XUpdateInput& input,
                           std::vector<double>& cost,
                           std::vector<double>& linear) {
  const std::size_t P = agent.priced_edges().size();
  if (input.prices.size() != P || input.expected.size() != P) {
    throw ModelError("x-update inputs must cover the priced support");
  }
  const std::size_t S = agent.num_routes();
  cost.assign(S, 0.0);
  linear.assign(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (int k : agent.route_priced()[s]) {
      cost[s] += input.prices[k];
      linear[s] += input.expected[k];
    }
  }
  const VehicleRequest& r = agent.request();
  RouteSubproblem p;
  p.values = r.values;
  p.outside_value = r.outside_value;
  p.drop_value = r.drop_value;
  p.weight = input.weight;
  p.lambda = input.lambda;
  p.beta = input.beta;
  p.outside_price = input.outside_price;
  p.route_cost = cost;
  p.linear = linear;
  p.gram = agent.gram();
  return p;
}

SubproblemResult solve_x_update(const AgentModel& agent,
                                const XUpdateInput& input,
                                const RouteDemand* warm,
                                const SubproblemOptions& options) {
  std::vector<double> cost, linear;
  return solve_route_subproblem(route_form(agent, input, cost, linear), warm,
                                options);
}

double x_update_objective(const AgentModel& agent, const XUpdateInput& input,
                          const AllocationVector& x) {
  const ConstraintSystem& cs = agent.constraints();
  if (x.edges.size() != cs.support.size()) {
    throw ModelError("allocation has wrong dimension");
  }
  const double f = utility(agent, x);
  const double g = cs.selection_dot(x.edges) + x.drop - 1.0;
  double F = 0.0;
  if (input.weight > 0.0) F += input.weight * std::log(std::max(f, kLogFloor));
  F -= input.outside_price * x.outside;
  const auto& priced = agent.priced_edges();
  for (std::size_t k = 0; k < priced.size(); ++k) {
    const double xe = x.edges[cs.column_of(priced[k])];
    const double diff = input.expected[k] - xe;
    F -= input.prices[k] * xe + 0.5 * input.beta * diff * diff;
  }
  F -= input.lambda * g + 0.5 * input.beta * g * g;
  return F;
}

}  // namespace airmarket
