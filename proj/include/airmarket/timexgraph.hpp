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

// Time-extended airspace graph, routes over it, and the per-menu linear
// constraint system (selection vector and flow/tie rows).

#ifndef AIRMARKET_TIMEXGRAPH_HPP_
#define AIRMARKET_TIMEXGRAPH_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace airmarket {

using RegionId = int;
using NodeId = int;
using EdgeId = int;

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a route or menu references an edge id the graph does not have.
class UnknownEdgeError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Thrown when the departing edges of a menu are not exclusive to their route.
class DepartingEdgeConflict : public ModelError {
 public:
  using ModelError::ModelError;
};

enum class NodeKind : std::uint8_t { kMain = 0, kArrival = 1, kDeparture = 2 };

// Edge families. E1..E3 are capacity constrained and priced, E4 is not.
enum class EdgeKind : std::uint8_t {
  kArrival = 0,    // arr(r,t) -> v(r,t)
  kDeparture = 1,  // v(r,t) -> dep(r,t)
  kPark = 2,       // v(r,t) -> v(r,t+1)
  kTransit = 3,    // dep(r,t) -> arr(r',t+1)
};

const char* to_string(EdgeKind kind);

// Capacity of one region; each vector holds one entry per time step
// (index t-1), or a single entry applied to every step.
struct RegionCapacity {
  std::vector<double> arrival;
  std::vector<double> departure;
  std::vector<double> park;

  static RegionCapacity uniform(double arrival, double departure, double park);
  bool operator==(const RegionCapacity&) const = default;
};

struct SpatialGraph {
  std::vector<std::string> regions;
  // Directed adjacency (r, r'), r != r'. Self-loops are rejected.
  std::vector<std::pair<RegionId, RegionId>> adjacency;
  std::vector<RegionCapacity> capacity;

  RegionId index_of(const std::string& name) const;
  void validate(int horizon) const;
};

struct Node {
  RegionId region;
  int time;
  NodeKind kind;
};

struct Edge {
  EdgeKind kind;
  NodeId from;
  NodeId to;
  RegionId region;  // source region
  int time;         // time of the source node
  RegionId target;  // destination region (== region except for transit)
  double capacity;  // kUnlimited for transit

  bool constrained() const { return kind != EdgeKind::kTransit; }
};

class TimeExtendedGraph {
 public:
  static TimeExtendedGraph build(const SpatialGraph& spatial, int horizon,
                                 double step_seconds);

  int horizon() const { return horizon_; }
  double step_seconds() const { return step_seconds_; }
  int num_regions() const { return static_cast<int>(region_names_.size()); }
  const std::string& region_name(RegionId r) const { return region_names_[r]; }

  int num_nodes() const { return 3 * num_regions() * horizon_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  // Constrained edges occupy ids [0, num_constrained()).
  int num_constrained() const { return num_constrained_; }

  NodeId node_id(RegionId r, int t, NodeKind kind) const;
  Node node(NodeId id) const;
  std::string node_label(NodeId id) const;

  const Edge& edge(EdgeId id) const;
  const std::vector<Edge>& edges() const { return edges_; }
  bool contains(EdgeId id) const { return id >= 0 && id < num_edges(); }

  std::optional<EdgeId> arrival_edge(RegionId r, int t) const;
  std::optional<EdgeId> departure_edge(RegionId r, int t) const;
  std::optional<EdgeId> park_edge(RegionId r, int t) const;
  std::optional<EdgeId> transit_edge(RegionId from, int t, RegionId to) const;
  bool adjacent(RegionId from, RegionId to) const;

  std::span<const EdgeId> out_edges(NodeId n) const;
  std::span<const EdgeId> in_edges(NodeId n) const;

  // Capacities of all edges indexed by edge id.
  std::vector<double> capacities() const;

 private:
  int horizon_ = 0;
  double step_seconds_ = 0.0;
  int num_constrained_ = 0;
  std::vector<std::string> region_names_;
  std::vector<Edge> edges_;
  // Sorted targets and the transit id of the first (t=1) edge per source.
  std::vector<std::vector<RegionId>> neighbours_;
  std::vector<int> transit_base_;
  std::vector<int> out_offset_, in_offset_;
  std::vector<EdgeId> out_list_, in_list_;
};

struct Route {
  std::string label;
  std::vector<EdgeId> edges;
  EdgeId departing_edge = -1;
  int start_time = 0;
  RegionId origin = -1;
  RegionId destination = -1;
  int end_time = 0;
};

struct RouteValidity {
  bool valid = false;
  // Index of the first offending edge when invalid.
  std::optional<std::size_t> first_violation;
  std::string reason;
  // The route contains no departure edge, so e*(s) is its first park edge.
  bool departs_by_parking = false;
};

// Structural check: non-empty, starts at a main node, consecutive edges share
// endpoints, legal family transitions, time advances. Throws UnknownEdgeError
// for ids outside the graph.
RouteValidity validate_route(const TimeExtendedGraph& g,
                             std::span<const EdgeId> edges);

// The departing edge: first departure edge, else the first edge.
EdgeId departing_edge(const TimeExtendedGraph& g, std::span<const EdgeId> edges);

// Validates and fills derived fields. Throws ModelError if invalid.
Route make_route(const TimeExtendedGraph& g, std::vector<EdgeId> edges,
                 std::string label = {});

// A route described by where it starts and how long it stays in each region.
// Leg k>0 is entered via departure, transit and arrival edges. Dwell counts
// park edges taken in that region.
struct Leg {
  RegionId region;
  int dwell;
};

// Returns nullopt when the itinerary leaves the horizon or crosses a
// non-adjacent pair of regions.
std::optional<Route> route_from_itinerary(const TimeExtendedGraph& g,
                                          int start_time,
                                          std::span<const Leg> legs,
                                          std::string label = {});

// Duration in time steps of an itinerary (end time minus start time).
int itinerary_duration(std::span<const Leg> legs);

enum class RowKind : std::uint8_t { kFlowBalance, kRouteTie };

struct ConstraintRow {
  RowKind kind;
  int anchor;  // node id for flow balance, edge id for a tie row
  std::vector<std::pair<int, double>> terms;  // (support column, coefficient)
};

// Constraints of one menu restricted to the union of its route edges
// (the support). Columns are sorted edge ids.
struct ConstraintSystem {
  std::vector<EdgeId> support;
  std::vector<double> selection;  // a~ over the support
  std::vector<ConstraintRow> rows;
  std::vector<std::vector<int>> route_columns;  // per route, support columns
  std::vector<int> departing_column;            // per route

  int column_of(EdgeId e) const;  // -1 when absent
  std::vector<double> indicator(std::size_t route) const;
  // Largest |row . x| over all rows.
  double max_row_residual(std::span<const double> x) const;
  double selection_dot(std::span<const double> x) const;
};

ConstraintSystem build_constraints(const TimeExtendedGraph& g,
                                   std::span<const Route> menu);

}  // namespace airmarket

#endif  // AIRMARKET_TIMEXGRAPH_HPP_
