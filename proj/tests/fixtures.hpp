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

// Shared test fixtures: small graphs, the three-region worked example and
// hand-rolled random generators.

#ifndef AIRMARKET_TESTS_FIXTURES_HPP_
#define AIRMARKET_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "airmarket/agents.hpp"
#include "airmarket/timexgraph.hpp"

namespace airmarket::testing {

// Regions A, B, C with A<->B<->C adjacency and the given uniform capacity.
inline SpatialGraph abc_graph(double cap = 1.0) {
  SpatialGraph s;
  s.regions = {"A", "B", "C"};
  s.adjacency = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  s.capacity.assign(3, RegionCapacity::uniform(cap, cap, cap));
  return s;
}

// Edge lookups that must exist.
inline EdgeId arr(const TimeExtendedGraph& g, RegionId r, int t) {
  return g.arrival_edge(r, t).value();
}
inline EdgeId dep(const TimeExtendedGraph& g, RegionId r, int t) {
  return g.departure_edge(r, t).value();
}
inline EdgeId park(const TimeExtendedGraph& g, RegionId r, int t) {
  return g.park_edge(r, t).value();
}
inline EdgeId hop(const TimeExtendedGraph& g, RegionId a, int t, RegionId b) {
  return g.transit_edge(a, t, b).value();
}

// The three routes of the worked example (A=0, B=1, C=2).
struct WorkedExample {
  std::vector<EdgeId> s1, s2, s3;
};

inline WorkedExample worked_example(const TimeExtendedGraph& g) {
  constexpr RegionId A = 0, B = 1, C = 2;
  WorkedExample w;
  w.s1 = {park(g, A, 1), park(g, A, 2), park(g, A, 3), park(g, A, 4)};
  w.s2 = {dep(g, A, 1),  hop(g, A, 1, B), arr(g, B, 2), park(g, B, 2),
          park(g, B, 3), dep(g, B, 4),    hop(g, B, 4, C), arr(g, C, 5)};
  w.s3 = {park(g, A, 1), dep(g, A, 2),  hop(g, A, 2, B), arr(g, B, 3),
          park(g, B, 3), park(g, B, 4), dep(g, B, 5),    hop(g, B, 5, C)};
  return w;
}

// Line of `n` regions R0..R{n-1} with bidirectional neighbours.
inline SpatialGraph line_graph(int n, double cap) {
  SpatialGraph s;
  for (int i = 0; i < n; ++i) s.regions.push_back("R" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) {
    s.adjacency.push_back({i, i + 1});
    s.adjacency.push_back({i + 1, i});
  }
  s.capacity.assign(n, RegionCapacity::uniform(cap, cap, cap));
  return s;
}

// Random menu of `routes` itineraries along the line, each starting at a
// distinct time so departing edges are exclusive.
inline VehicleRequest random_request(const TimeExtendedGraph& g,
                                     std::mt19937_64& rng, int routes,
                                     const std::string& id) {
  std::uniform_int_distribution<int> region(0, g.num_regions() - 1);
  std::uniform_int_distribution<int> dwell(0, 2);
  std::uniform_real_distribution<double> value(50.0, 250.0);
  std::uniform_real_distribution<double> budget(50.0, 250.0);
  VehicleRequest r;
  r.id = id;
  const RegionId origin = region(rng);
  RegionId dest = region(rng);
  if (dest == origin) dest = origin > 0 ? origin - 1 : origin + 1;
  std::vector<Leg> legs{{origin, 0}};
  int step = origin < dest ? 1 : -1;
  for (RegionId q = origin; q != dest;) {
    q += step;
    legs.push_back({q, dwell(rng)});
  }
  const int span = itinerary_duration(legs);
  std::uniform_int_distribution<int> start(1, std::max(1, g.horizon() - span - routes));
  const int t0 = start(rng);
  for (int k = 0; k < routes; ++k) {
    auto route = route_from_itinerary(g, t0 + k, legs, id + "/" + std::to_string(k));
    if (!route) break;
    r.menu.push_back(*route);
    r.values.push_back(value(rng));
  }
  r.drop_value = std::uniform_real_distribution<double>(0.0, 40.0)(rng);
  r.outside_value = 1.0;
  r.budget = budget(rng);
  return r;
}

}  // namespace airmarket::testing

#endif  // AIRMARKET_TESTS_FIXTURES_HPP_
