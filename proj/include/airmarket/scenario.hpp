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

// Scenario data model, JSON persistence, the synthetic delivery-network
// generator and the vertiport reservation fixture.

#ifndef AIRMARKET_SCENARIO_HPP_
#define AIRMARKET_SCENARIO_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "airmarket/timexgraph.hpp"

namespace airmarket {

enum class RoundingMode { kHalfUp, kFloor, kCeil };

const char* to_string(RoundingMode mode);
RoundingMode parse_rounding(const std::string& name);
double scale_capacity(double base, double fraction, RoundingMode mode);

struct RegionSpec {
  std::string name;
  std::string kind;  // "sector", "vertiport" or "route"
  RegionCapacity capacity;  // at capacity fraction 1.0

  bool operator==(const RegionSpec&) const = default;
};

struct ItineraryLeg {
  std::string region;
  int dwell = 0;

  bool operator==(const ItineraryLeg&) const = default;
};

struct FlightRequest {
  std::string id;
  int departure = 1;  // desired departure time step
  std::vector<ItineraryLeg> itinerary;
  double value = 0.0;  // valuation of the on-time route
  int delay_options = 4;
  double drop_value = 40.0;
  double outside_value = 1.0;
  double initial_budget = 0.0;

  bool operator==(const FlightRequest&) const = default;
};

struct MarketParams {
  double outside_price = 10.0;
  int grant_min = 150;
  int grant_max = 250;
  double rebase_factor = 0.5;
  double delay_factor = 0.95;
  int max_rebases = 2;
  bool grant_rebased = true;

  bool operator==(const MarketParams&) const = default;
};

// Solver settings stored with a scenario; command-line flags override them.
struct SolverParams {
  double beta = 50.0;
  int inner_iterations = 30;
  int max_outer = 1000;
  // Non-positive values select the default fraction-of-maximum rule.
  double tol_ce = 0.0;
  double tol_ice = 1e-4;
  double tol_eae = 1e-3;

  bool operator==(const SolverParams&) const = default;
};

struct Scenario {
  std::string name;
  int horizon = 0;
  double step_seconds = 15.0;
  double capacity_fraction = 1.0;
  RoundingMode rounding = RoundingMode::kHalfUp;
  int auctions = 1;
  std::uint64_t seed = 0;
  std::vector<RegionSpec> regions;
  std::vector<std::pair<std::string, std::string>> adjacency;
  MarketParams market;
  SolverParams solver;
  std::vector<FlightRequest> requests;

  // Spatial graph with capacities scaled by `fraction`.
  SpatialGraph spatial(double fraction) const;
  SpatialGraph spatial() const { return spatial(capacity_fraction); }
  // Throws ModelError when regions, itineraries or parameters are invalid.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

// Itinerary legs resolved against a graph.
std::vector<Leg> resolve_itinerary(const TimeExtendedGraph& g,
                                   const FlightRequest& r);

struct GeneratorParams {
  int grid_cols = 4;
  int grid_rows = 3;
  int vertiports = 4;
  int flights = 177;
  int horizon = 400;
  double step_seconds = 15.0;
  int min_dwell = 3;  // steps spent crossing one sector
  int max_dwell = 6;
  int min_service = 2;  // steps spent at the delivery sector
  int max_service = 4;
  double value_min = 150.0;
  double value_max = 250.0;
  int delay_options = 4;
  double drop_value = 40.0;
  double outside_value = 1.0;
  double capacity_fraction = 1.0;
  RoundingMode rounding = RoundingMode::kHalfUp;
  int auctions = 13;
  MarketParams market;
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic under params.seed. Departure times are the sorted order
// statistics of uniform draws over the departure window, i.e. a Poisson
// stream conditioned on its count. Base capacities are the peak loads of all
// on-time routes, one value for sectors and one for vertiports.
Scenario generate_scenario(const GeneratorParams& params);

// Twenty air taxis over seven vertiports with one en-route region per
// requested (origin, destination) pair, solved as a single auction.
Scenario vertiport_fixture();

}  // namespace airmarket

#endif  // AIRMARKET_SCENARIO_HPP_
