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

#include "airmarket/timexgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace airmarket {
namespace {

double capacity_at(const std::vector<double>& values, int t) {
  if (values.size() == 1) return values[0];
  return values[static_cast<std::size_t>(t - 1)];
}

void check_profile(const std::vector<double>& values, int horizon,
                   const std::string& what) {
  if (values.size() != 1 && static_cast<int>(values.size()) < horizon) {
    throw ModelError(what + ": capacity profile shorter than horizon");
  }
  for (double v : values) {
    if (!(v >= 0.0)) throw ModelError(what + ": negative or NaN capacity");
  }
}

}  // namespace

const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kArrival: return "arrival";
    case EdgeKind::kDeparture: return "departure";
    case EdgeKind::kPark: return "park";
    case EdgeKind::kTransit: return "transit";
  }
  return "?";
}

RegionCapacity RegionCapacity::uniform(double arrival, double departure,
                                       double park) {
  return RegionCapacity{{arrival}, {departure}, {park}};
}

RegionId SpatialGraph::index_of(const std::string& name) const {
  auto it = std::find(regions.begin(), regions.end(), name);
  if (it == regions.end()) throw ModelError("unknown region '" + name + "'");
  return static_cast<RegionId>(it - regions.begin());
}

void SpatialGraph::validate(int horizon) const {
  if (horizon < 1) throw ModelError("horizon must be at least 1");
  if (regions.empty()) throw ModelError("graph has no regions");
  if (capacity.size() != regions.size()) {
    throw ModelError("capacity table does not match region count");
  }
  std::set<std::string> names(regions.begin(), regions.end());
  if (names.size() != regions.size()) throw ModelError("duplicate region name");
  const int r_count = static_cast<int>(regions.size());
  std::set<std::pair<RegionId, RegionId>> seen;
  for (auto [a, b] : adjacency) {
    if (a < 0 || b < 0 || a >= r_count || b >= r_count) {
      throw ModelError("adjacency references an unknown region");
    }
    if (a == b) throw ModelError("self-loop in adjacency of " + regions[a]);
    if (!seen.insert({a, b}).second) {
      throw ModelError("duplicate adjacency " + regions[a] + "->" + regions[b]);
    }
  }
  for (int r = 0; r < r_count; ++r) {
    check_profile(capacity[r].arrival, horizon, regions[r]);
    check_profile(capacity[r].departure, horizon, regions[r]);
    check_profile(capacity[r].park, horizon, regions[r]);
  }
}

TimeExtendedGraph TimeExtendedGraph::build(const SpatialGraph& spatial,
                                           int horizon, double step_seconds) {
  spatial.validate(horizon);
  if (!(step_seconds > 0.0)) throw ModelError("step length must be positive");
  TimeExtendedGraph g;
  g.horizon_ = horizon;
  g.step_seconds_ = step_seconds;
  g.region_names_ = spatial.regions;
  const int R = g.num_regions();
  const int T = horizon;

  g.neighbours_.assign(R, {});
  for (auto [a, b] : spatial.adjacency) g.neighbours_[a].push_back(b);
  for (auto& n : g.neighbours_) std::sort(n.begin(), n.end());

  auto nid = [&](RegionId r, int t, NodeKind k) { return g.node_id(r, t, k); };

  // Lexicographic order over (kind, region, time, target).
  for (int r = 0; r < R; ++r) {
    for (int t = 1; t <= T; ++t) {
      g.edges_.push_back({EdgeKind::kArrival, nid(r, t, NodeKind::kArrival),
                          nid(r, t, NodeKind::kMain), r, t, r,
                          capacity_at(spatial.capacity[r].arrival, t)});
    }
  }
  for (int r = 0; r < R; ++r) {
    for (int t = 1; t <= T; ++t) {
      g.edges_.push_back({EdgeKind::kDeparture, nid(r, t, NodeKind::kMain),
                          nid(r, t, NodeKind::kDeparture), r, t, r,
                          capacity_at(spatial.capacity[r].departure, t)});
    }
  }
  for (int r = 0; r < R; ++r) {
    for (int t = 1; t < T; ++t) {
      g.edges_.push_back({EdgeKind::kPark, nid(r, t, NodeKind::kMain),
                          nid(r, t + 1, NodeKind::kMain), r, t, r,
                          capacity_at(spatial.capacity[r].park, t)});
    }
  }
  g.num_constrained_ = static_cast<int>(g.edges_.size());
  g.transit_base_.assign(R, 0);
  for (int r = 0; r < R; ++r) {
    g.transit_base_[r] = static_cast<int>(g.edges_.size());
    for (int t = 1; t < T; ++t) {
      for (RegionId q : g.neighbours_[r]) {
        g.edges_.push_back({EdgeKind::kTransit,
                            nid(r, t, NodeKind::kDeparture),
                            nid(q, t + 1, NodeKind::kArrival), r, t, q,
                            kUnlimited});
      }
    }
  }

  const int N = g.num_nodes();
  std::vector<int> out_count(N + 1, 0), in_count(N + 1, 0);
  for (const Edge& e : g.edges_) {
    ++out_count[e.from + 1];
    ++in_count[e.to + 1];
  }
  for (int i = 0; i < N; ++i) {
    out_count[i + 1] += out_count[i];
    in_count[i + 1] += in_count[i];
  }
  g.out_offset_ = out_count;
  g.in_offset_ = in_count;
  g.out_list_.assign(g.edges_.size(), 0);
  g.in_list_.assign(g.edges_.size(), 0);
  std::vector<int> oc(out_count.begin(), out_count.end() - 1);
  std::vector<int> ic(in_count.begin(), in_count.end() - 1);
  for (EdgeId id = 0; id < g.num_edges(); ++id) {
    const Edge& e = g.edges_[id];
    g.out_list_[oc[e.from]++] = id;
    g.in_list_[ic[e.to]++] = id;
  }
  return g;
}

NodeId TimeExtendedGraph::node_id(RegionId r, int t, NodeKind kind) const {
  return ((t - 1) * num_regions() + r) * 3 + static_cast<int>(kind);
}

Node TimeExtendedGraph::node(NodeId id) const {
  const int k = id % 3;
  const int rt = id / 3;
  return Node{rt % num_regions(), rt / num_regions() + 1,
              static_cast<NodeKind>(k)};
}

std::string TimeExtendedGraph::node_label(NodeId id) const {
  const Node n = node(id);
  const char* prefix = n.kind == NodeKind::kMain        ? "v"
                       : n.kind == NodeKind::kArrival ? "varr"
                                                      : "vdep";
  std::ostringstream os;
  os << prefix << region_names_[n.region] << n.time;
  return os.str();
}

const Edge& TimeExtendedGraph::edge(EdgeId id) const {
  if (!contains(id)) {
    throw UnknownEdgeError("unknown edge id " + std::to_string(id));
  }
  return edges_[id];
}

std::optional<EdgeId> TimeExtendedGraph::arrival_edge(RegionId r, int t) const {
  if (r < 0 || r >= num_regions() || t < 1 || t > horizon_) return std::nullopt;
  return r * horizon_ + (t - 1);
}

std::optional<EdgeId> TimeExtendedGraph::departure_edge(RegionId r,
                                                        int t) const {
  if (r < 0 || r >= num_regions() || t < 1 || t > horizon_) return std::nullopt;
  return num_regions() * horizon_ + r * horizon_ + (t - 1);
}

std::optional<EdgeId> TimeExtendedGraph::park_edge(RegionId r, int t) const {
  if (r < 0 || r >= num_regions() || t < 1 || t >= horizon_) {
    return std::nullopt;
  }
  return 2 * num_regions() * horizon_ + r * (horizon_ - 1) + (t - 1);
}

bool TimeExtendedGraph::adjacent(RegionId from, RegionId to) const {
  if (from < 0 || from >= num_regions()) return false;
  const auto& n = neighbours_[from];
  return std::binary_search(n.begin(), n.end(), to);
}

std::optional<EdgeId> TimeExtendedGraph::transit_edge(RegionId from, int t,
                                                      RegionId to) const {
  if (from < 0 || from >= num_regions() || t < 1 || t >= horizon_) {
    return std::nullopt;
  }
  const auto& n = neighbours_[from];
  auto it = std::lower_bound(n.begin(), n.end(), to);
  if (it == n.end() || *it != to) return std::nullopt;
  const int width = static_cast<int>(n.size());
  return transit_base_[from] + (t - 1) * width + static_cast<int>(it - n.begin());
}

std::span<const EdgeId> TimeExtendedGraph::out_edges(NodeId n) const {
  return {out_list_.data() + out_offset_[n],
          static_cast<std::size_t>(out_offset_[n + 1] - out_offset_[n])};
}

std::span<const EdgeId> TimeExtendedGraph::in_edges(NodeId n) const {
  return {in_list_.data() + in_offset_[n],
          static_cast<std::size_t>(in_offset_[n + 1] - in_offset_[n])};
}

std::vector<double> TimeExtendedGraph::capacities() const {
  std::vector<double> out(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) out[i] = edges_[i].capacity;
  return out;
}

// ---------------------------------------------------------------------------
// Routes

namespace {

bool legal_transition(EdgeKind a, EdgeKind b) {
  switch (a) {
    case EdgeKind::kArrival:
      return b == EdgeKind::kPark || b == EdgeKind::kDeparture;
    case EdgeKind::kDeparture: return b == EdgeKind::kTransit;
    case EdgeKind::kTransit: return b == EdgeKind::kArrival;
    case EdgeKind::kPark:
      return b == EdgeKind::kPark || b == EdgeKind::kDeparture;
  }
  return false;
}

RouteValidity invalid(std::size_t index, std::string reason) {
  RouteValidity v;
  v.valid = false;
  v.first_violation = index;
  v.reason = std::move(reason);
  return v;
}

}  // namespace

RouteValidity validate_route(const TimeExtendedGraph& g,
                             std::span<const EdgeId> edges) {
  for (EdgeId id : edges) g.edge(id);  // throws on unknown ids
  if (edges.empty()) return invalid(0, "empty route");
  const Edge& first = g.edge(edges[0]);
  if (first.kind != EdgeKind::kDeparture && first.kind != EdgeKind::kPark) {
    return invalid(0, "route must start at a main node");
  }
  bool has_departure = first.kind == EdgeKind::kDeparture;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const Edge& a = g.edge(edges[i - 1]);
    const Edge& b = g.edge(edges[i]);
    if (a.to != b.from) return invalid(i, "edge does not continue the path");
    if (!legal_transition(a.kind, b.kind)) {
      return invalid(i, std::string("illegal transition ") + to_string(a.kind) +
                            " -> " + to_string(b.kind));
    }
    if (g.node(b.from).time < g.node(a.from).time) {
      return invalid(i, "time goes backwards");
    }
    has_departure = has_departure || b.kind == EdgeKind::kDeparture;
  }
  RouteValidity v;
  v.valid = true;
  v.departs_by_parking = !has_departure;
  return v;
}

EdgeId departing_edge(const TimeExtendedGraph& g,
                      std::span<const EdgeId> edges) {
  if (edges.empty()) throw ModelError("empty route has no departing edge");
  for (EdgeId id : edges) {
    if (g.edge(id).kind == EdgeKind::kDeparture) return id;
  }
  return edges.front();
}

Route make_route(const TimeExtendedGraph& g, std::vector<EdgeId> edges,
                 std::string label) {
  RouteValidity v = validate_route(g, edges);
  if (!v.valid) {
    throw ModelError("invalid route '" + label + "' at edge " +
                     std::to_string(*v.first_violation) + ": " + v.reason);
  }
  Route r;
  r.label = std::move(label);
  r.departing_edge = departing_edge(g, edges);
  const Edge& first = g.edge(edges.front());
  const Edge& last = g.edge(edges.back());
  r.start_time = first.time;
  r.origin = first.region;
  const Node end = g.node(last.to);
  r.destination = end.region;
  r.end_time = end.time;
  r.edges = std::move(edges);
  return r;
}

int itinerary_duration(std::span<const Leg> legs) {
  int d = 0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    d += legs[i].dwell + (i > 0 ? 1 : 0);
  }
  return d;
}

std::optional<Route> route_from_itinerary(const TimeExtendedGraph& g,
                                          int start_time,
                                          std::span<const Leg> legs,
                                          std::string label) {
  if (legs.empty() || start_time < 1) return std::nullopt;
  if (start_time + itinerary_duration(legs) > g.horizon()) return std::nullopt;
  std::vector<EdgeId> edges;
  int t = start_time;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const Leg& leg = legs[i];
    if (leg.dwell < 0) return std::nullopt;
    if (i > 0) {
      const RegionId prev = legs[i - 1].region;
      auto d = g.departure_edge(prev, t);
      auto x = g.transit_edge(prev, t, leg.region);
      auto a = g.arrival_edge(leg.region, t + 1);
      if (!d || !x || !a) return std::nullopt;
      edges.insert(edges.end(), {*d, *x, *a});
      ++t;
    }
    for (int k = 0; k < leg.dwell; ++k) {
      auto p = g.park_edge(leg.region, t);
      if (!p) return std::nullopt;
      edges.push_back(*p);
      ++t;
    }
  }
  if (edges.empty()) return std::nullopt;
  return make_route(g, std::move(edges), std::move(label));
}

// ---------------------------------------------------------------------------
// Constraint system

int ConstraintSystem::column_of(EdgeId e) const {
  auto it = std::lower_bound(support.begin(), support.end(), e);
  if (it == support.end() || *it != e) return -1;
  return static_cast<int>(it - support.begin());
}

std::vector<double> ConstraintSystem::indicator(std::size_t route) const {
  std::vector<double> chi(support.size(), 0.0);
  for (int c : route_columns.at(route)) chi[c] = 1.0;
  return chi;
}

double ConstraintSystem::max_row_residual(std::span<const double> x) const {
  double worst = 0.0;
  for (const ConstraintRow& row : rows) {
    double s = 0.0;
    for (auto [c, a] : row.terms) s += a * x[c];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double ConstraintSystem::selection_dot(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) s += selection[i] * x[i];
  return s;
}

ConstraintSystem build_constraints(const TimeExtendedGraph& g,
                                   std::span<const Route> menu) {
  ConstraintSystem cs;
  std::set<EdgeId> support;
  for (const Route& r : menu) {
    for (EdgeId e : r.edges) {
      g.edge(e);
      support.insert(e);
    }
  }
  cs.support.assign(support.begin(), support.end());
  cs.selection.assign(cs.support.size(), 0.0);

  // Departing edges must be exclusive to their own route.
  std::map<EdgeId, std::size_t> owner;
  for (std::size_t s = 0; s < menu.size(); ++s) {
    const EdgeId e = menu[s].departing_edge;
    if (!owner.emplace(e, s).second) {
      throw DepartingEdgeConflict("routes '" + menu[owner[e]].label + "' and '" +
                                  menu[s].label + "' share a departing edge");
    }
  }
  std::vector<std::vector<std::size_t>> users(cs.support.size());
  for (std::size_t s = 0; s < menu.size(); ++s) {
    std::vector<int> cols;
    for (EdgeId e : menu[s].edges) cols.push_back(cs.column_of(e));
    cs.route_columns.push_back(cols);
    cs.departing_column.push_back(cs.column_of(menu[s].departing_edge));
    for (int c : cols) users[c].push_back(s);
  }
  for (std::size_t s = 0; s < menu.size(); ++s) {
    const int c = cs.departing_column[s];
    if (users[c].size() != 1) {
      const std::size_t other = users[c][0] == s ? users[c][1] : users[c][0];
      throw DepartingEdgeConflict("departing edge of route '" + menu[s].label +
                                  "' is also traversed by route '" +
                                  menu[other].label + "'");
    }
    cs.selection[c] = 1.0;
  }

  // Flow balance at interior support nodes.
  std::set<NodeId> terminals, nodes;
  for (const Route& r : menu) {
    terminals.insert(g.edge(r.edges.front()).from);
    terminals.insert(g.edge(r.edges.back()).to);
  }
  for (EdgeId e : cs.support) {
    nodes.insert(g.edge(e).from);
    nodes.insert(g.edge(e).to);
  }
  for (NodeId n : nodes) {
    if (terminals.count(n)) continue;
    ConstraintRow row{RowKind::kFlowBalance, n, {}};
    for (EdgeId e : g.in_edges(n)) {
      if (int c = cs.column_of(e); c >= 0) row.terms.push_back({c, 1.0});
    }
    for (EdgeId e : g.out_edges(n)) {
      if (int c = cs.column_of(e); c >= 0) row.terms.push_back({c, -1.0});
    }
    std::sort(row.terms.begin(), row.terms.end());
    cs.rows.push_back(std::move(row));
  }

  // Tie every non-departing edge to the departing edges of its routes.
  for (std::size_t c = 0; c < cs.support.size(); ++c) {
    if (cs.selection[c] != 0.0) continue;
    ConstraintRow row{RowKind::kRouteTie, cs.support[c], {}};
    row.terms.push_back({static_cast<int>(c), 1.0});
    for (std::size_t s : users[c]) {
      row.terms.push_back({cs.departing_column[s], -1.0});
    }
    std::sort(row.terms.begin(), row.terms.end());
    cs.rows.push_back(std::move(row));
  }
  return cs;
}

}  // namespace airmarket
