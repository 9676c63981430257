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

#include "airmarket/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "airmarket/random.hpp"
#include "json.hpp"

namespace airmarket {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "airmarket-scenario";
constexpr int kVersion = 1;

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError("scenario: " + what);
}

std::vector<double> scale(const std::vector<double>& v, double fraction,
                          RoundingMode mode) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = scale_capacity(v[i], fraction, mode);
  }
  return out;
}

void check_profile(const std::vector<double>& v, int horizon,
                   const std::string& what) {
  require(v.size() == 1 || static_cast<int>(v.size()) >= horizon,
          what + " needs 1 or at least horizon entries");
  for (double c : v) require(c >= 0.0, what + " is negative");
}

// JSON has no infinity; unlimited capacities are written as null.
json profile_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double c : v) {
    if (std::isinf(c)) {
      a.push_back(nullptr);
    } else {
      a.push_back(c);
    }
  }
  return a;
}

std::vector<double> profile_from_json(const json& a) {
  require(a.is_array(), "capacity profile must be an array");
  std::vector<double> v;
  for (const json& c : a) v.push_back(c.is_null() ? kUnlimited : c.get<double>());
  return v;
}

// Prefix followed by a zero-padded number, e.g. S07 or F123.
std::string numbered(char prefix, int n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return prefix + digits;
}

}  // namespace

const char* to_string(RoundingMode mode) {
  switch (mode) {
    case RoundingMode::kHalfUp: return "half-up";
    case RoundingMode::kFloor: return "floor";
    case RoundingMode::kCeil: return "ceil";
  }
  return "?";
}

RoundingMode parse_rounding(const std::string& name) {
  if (name == "half-up") return RoundingMode::kHalfUp;
  if (name == "floor") return RoundingMode::kFloor;
  if (name == "ceil") return RoundingMode::kCeil;
  throw ModelError("unknown rounding mode '" + name + "'");
}

double scale_capacity(double base, double fraction, RoundingMode mode) {
  if (std::isinf(base)) return base;
  // The slack absorbs products such as 0.7 * 10 = 6.999999999999999.
  const double x = base * fraction;
  switch (mode) {
    case RoundingMode::kHalfUp: return std::floor(x + 0.5 + 1e-9);
    case RoundingMode::kFloor: return std::floor(x + 1e-9);
    case RoundingMode::kCeil: return std::ceil(x - 1e-9);
  }
  return x;
}

SpatialGraph Scenario::spatial(double fraction) const {
  SpatialGraph sg;
  for (const RegionSpec& r : regions) {
    sg.regions.push_back(r.name);
    sg.capacity.push_back({scale(r.capacity.arrival, fraction, rounding),
                           scale(r.capacity.departure, fraction, rounding),
                           scale(r.capacity.park, fraction, rounding)});
  }
  for (const auto& [a, b] : adjacency) {
    sg.adjacency.emplace_back(sg.index_of(a), sg.index_of(b));
  }
  return sg;
}

void Scenario::validate() const {
  require(horizon >= 1, "horizon must be positive");
  require(step_seconds > 0.0, "step_seconds must be positive");
  require(capacity_fraction > 0.0, "capacity_fraction must be positive");
  require(auctions >= 1 && auctions <= horizon,
          "auctions must lie in [1, horizon]");
  std::map<std::string, int> index;
  for (const RegionSpec& r : regions) {
    require(!r.name.empty(), "empty region name");
    require(index.emplace(r.name, static_cast<int>(index.size())).second,
            "duplicate region " + r.name);
    require(r.kind == "sector" || r.kind == "vertiport" || r.kind == "route",
            "region " + r.name + " has unknown kind '" + r.kind + "'");
    check_profile(r.capacity.arrival, horizon, r.name + " arrival capacity");
    check_profile(r.capacity.departure, horizon, r.name + " departure capacity");
    check_profile(r.capacity.park, horizon, r.name + " park capacity");
  }
  require(!regions.empty(), "no regions");
  std::set<std::pair<std::string, std::string>> links;
  for (const auto& [a, b] : adjacency) {
    require(index.count(a) && index.count(b),
            "adjacency " + a + "->" + b + " references an unknown region");
    require(a != b, "self-adjacency at " + a);
    links.emplace(a, b);
  }
  const MarketParams& m = market;
  require(m.outside_price > 0.0, "outside_price must be positive");
  require(m.grant_min >= 0 && m.grant_min <= m.grant_max, "bad grant range");
  require(m.rebase_factor > 0.0 && m.rebase_factor <= 1.0,
          "rebase_factor must lie in (0, 1]");
  require(m.delay_factor > 0.0 && m.delay_factor <= 1.0,
          "delay_factor must lie in (0, 1]");
  require(m.max_rebases >= 0, "max_rebases must be nonnegative");
  require(solver.beta > 0.0, "beta must be positive");
  require(solver.inner_iterations >= 1, "inner_iterations must be positive");
  require(solver.max_outer >= 1, "max_outer must be positive");
  require(solver.tol_ice > 0.0 && solver.tol_eae > 0.0,
          "tolerances must be positive");
  std::set<std::string> ids;
  for (const FlightRequest& r : requests) {
    require(!r.id.empty() && ids.insert(r.id).second,
            "missing or duplicate request id '" + r.id + "'");
    require(r.departure >= 1 && r.departure <= horizon,
            r.id + ": departure outside the horizon");
    require(!r.itinerary.empty(), r.id + ": empty itinerary");
    for (std::size_t k = 0; k < r.itinerary.size(); ++k) {
      const ItineraryLeg& leg = r.itinerary[k];
      require(index.count(leg.region),
              r.id + ": unknown region " + leg.region);
      require(leg.dwell >= 0, r.id + ": negative dwell");
      if (k > 0) {
        require(links.count({r.itinerary[k - 1].region, leg.region}),
                r.id + ": " + r.itinerary[k - 1].region + " and " +
                    leg.region + " are not adjacent");
      }
    }
    require(r.value >= 0.0, r.id + ": negative value");
    require(r.drop_value > 0.0 && r.outside_value > 0.0,
            r.id + ": drop and outside values must be positive");
    require(r.delay_options >= 0, r.id + ": negative delay_options");
    require(r.initial_budget >= 0.0, r.id + ": negative budget");
  }
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["name"] = s.name;
  j["horizon"] = s.horizon;
  j["step_seconds"] = s.step_seconds;
  j["capacity_fraction"] = s.capacity_fraction;
  j["rounding"] = to_string(s.rounding);
  j["auctions"] = s.auctions;
  j["seed"] = s.seed;
  json regions = json::array();
  for (const RegionSpec& r : s.regions) {
    regions.push_back({{"name", r.name},
                       {"kind", r.kind},
                       {"arrival", profile_to_json(r.capacity.arrival)},
                       {"departure", profile_to_json(r.capacity.departure)},
                       {"park", profile_to_json(r.capacity.park)}});
  }
  j["regions"] = regions;
  json adjacency = json::array();
  for (const auto& [a, b] : s.adjacency) adjacency.push_back({a, b});
  j["adjacency"] = adjacency;
  const MarketParams& m = s.market;
  j["market"] = {{"outside_price", m.outside_price},
                 {"grant_min", m.grant_min},
                 {"grant_max", m.grant_max},
                 {"rebase_factor", m.rebase_factor},
                 {"delay_factor", m.delay_factor},
                 {"max_rebases", m.max_rebases},
                 {"grant_rebased", m.grant_rebased}};
  const SolverParams& p = s.solver;
  j["solver"] = {{"beta", p.beta},
                 {"inner_iterations", p.inner_iterations},
                 {"max_outer", p.max_outer},
                 {"tol_ce", p.tol_ce},
                 {"tol_ice", p.tol_ice},
                 {"tol_eae", p.tol_eae}};
  json requests = json::array();
  for (const FlightRequest& r : s.requests) {
    json legs = json::array();
    for (const ItineraryLeg& l : r.itinerary) {
      legs.push_back({{"region", l.region}, {"dwell", l.dwell}});
    }
    requests.push_back({{"id", r.id},
                        {"departure", r.departure},
                        {"itinerary", legs},
                        {"value", r.value},
                        {"delay_options", r.delay_options},
                        {"drop_value", r.drop_value},
                        {"outside_value", r.outside_value},
                        {"initial_budget", r.initial_budget}});
  }
  j["requests"] = requests;
  return j.dump(1) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("scenario: malformed JSON: ") + e.what());
  }
  Scenario s;
  try {
    require(j.value("format", "") == kFormat, "not an airmarket scenario");
    require(j.at("version").get<int>() == kVersion, "unsupported version");
    s.name = j.value("name", "");
    s.horizon = j.at("horizon").get<int>();
    s.step_seconds = j.at("step_seconds").get<double>();
    s.capacity_fraction = j.value("capacity_fraction", 1.0);
    s.rounding = parse_rounding(j.value("rounding", "half-up"));
    s.auctions = j.value("auctions", 1);
    s.seed = j.value("seed", std::uint64_t{0});
    for (const json& r : j.at("regions")) {
      s.regions.push_back({r.at("name").get<std::string>(),
                           r.at("kind").get<std::string>(),
                           {profile_from_json(r.at("arrival")),
                            profile_from_json(r.at("departure")),
                            profile_from_json(r.at("park"))}});
    }
    for (const json& a : j.at("adjacency")) {
      require(a.is_array() && a.size() == 2, "adjacency entries are pairs");
      s.adjacency.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    }
    if (j.contains("market")) {
      const json& m = j["market"];
      MarketParams& p = s.market;
      p.outside_price = m.value("outside_price", p.outside_price);
      p.grant_min = m.value("grant_min", p.grant_min);
      p.grant_max = m.value("grant_max", p.grant_max);
      p.rebase_factor = m.value("rebase_factor", p.rebase_factor);
      p.delay_factor = m.value("delay_factor", p.delay_factor);
      p.max_rebases = m.value("max_rebases", p.max_rebases);
      p.grant_rebased = m.value("grant_rebased", p.grant_rebased);
    }
    if (j.contains("solver")) {
      const json& o = j["solver"];
      SolverParams& p = s.solver;
      p.beta = o.value("beta", p.beta);
      p.inner_iterations = o.value("inner_iterations", p.inner_iterations);
      p.max_outer = o.value("max_outer", p.max_outer);
      p.tol_ce = o.value("tol_ce", p.tol_ce);
      p.tol_ice = o.value("tol_ice", p.tol_ice);
      p.tol_eae = o.value("tol_eae", p.tol_eae);
    }
    for (const json& r : j.at("requests")) {
      FlightRequest f;
      f.id = r.at("id").get<std::string>();
      f.departure = r.at("departure").get<int>();
      for (const json& l : r.at("itinerary")) {
        f.itinerary.push_back({l.at("region").get<std::string>(),
                               l.at("dwell").get<int>()});
      }
      f.value = r.at("value").get<double>();
      f.delay_options = r.value("delay_options", f.delay_options);
      f.drop_value = r.value("drop_value", f.drop_value);
      f.outside_value = r.value("outside_value", f.outside_value);
      f.initial_budget = r.value("initial_budget", f.initial_budget);
      s.requests.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("scenario: schema violation: ") + e.what());
  }
  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << scenario_to_json(s);
  if (!out) throw ModelError("failed writing " + path);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::vector<Leg> resolve_itinerary(const TimeExtendedGraph& g,
                                   const FlightRequest& r) {
  std::vector<Leg> legs;
  for (const ItineraryLeg& l : r.itinerary) {
    RegionId id = -1;
    for (RegionId k = 0; k < g.num_regions(); ++k) {
      if (g.region_name(k) == l.region) id = k;
    }
    if (id < 0) throw ModelError(r.id + ": unknown region " + l.region);
    legs.push_back({id, l.dwell});
  }
  return legs;
}

void GeneratorParams::validate() const {
  require(grid_cols >= 1 && grid_rows >= 1, "grid must be non-empty");
  require(vertiports >= 1 && vertiports <= 4,
          "vertiports sit on grid corners (1 to 4)");
  require(flights >= 0, "negative flight count");
  require(horizon >= 1 && step_seconds > 0.0, "bad horizon or step");
  require(min_dwell >= 0 && min_dwell <= max_dwell, "bad dwell range");
  require(min_service >= 0 && min_service <= max_service, "bad service range");
  require(value_min >= 0.0 && value_min <= value_max, "bad value range");
  require(delay_options >= 0, "negative delay_options");
  require(drop_value > 0.0 && outside_value > 0.0,
          "drop and outside values must be positive");
  require(capacity_fraction > 0.0, "capacity_fraction must be positive");
  require(auctions >= 1 && auctions <= horizon, "bad auction count");
  require(market.delay_factor > 0.0 && market.delay_factor <= 1.0 &&
              market.rebase_factor > 0.0 && market.rebase_factor <= 1.0,
          "factors must lie in (0, 1]");
  require(market.grant_min >= 0 && market.grant_min <= market.grant_max,
          "bad grant range");
}

Scenario generate_scenario(const GeneratorParams& params) {
  params.validate();
  const int cols = params.grid_cols, rows = params.grid_rows;
  const int sectors = cols * rows;
  Rng rng(params.seed);

  Scenario s;
  s.name = "synthetic-delivery";
  s.horizon = params.horizon;
  s.step_seconds = params.step_seconds;
  s.capacity_fraction = params.capacity_fraction;
  s.rounding = params.rounding;
  s.auctions = params.auctions;
  s.seed = params.seed;
  s.market = params.market;

  auto sector_name = [](int k) { return numbered('S', k + 1, 2); };
  for (int k = 0; k < sectors; ++k) s.regions.push_back({sector_name(k), "sector", {}});
  const int corners[4] = {0, cols - 1, (rows - 1) * cols, rows * cols - 1};
  std::vector<int> hub;  // corner sector per vertiport
  for (int v = 0; v < params.vertiports; ++v) {
    s.regions.push_back({numbered('V', v + 1, 2), "vertiport", {}});
    hub.push_back(corners[v]);
  }
  for (int k = 0; k < sectors; ++k) {
    const int r = k / cols, c = k % cols;
    if (c + 1 < cols) {
      s.adjacency.emplace_back(sector_name(k), sector_name(k + 1));
      s.adjacency.emplace_back(sector_name(k + 1), sector_name(k));
    }
    if (r + 1 < rows) {
      s.adjacency.emplace_back(sector_name(k), sector_name(k + cols));
      s.adjacency.emplace_back(sector_name(k + cols), sector_name(k));
    }
  }
  for (int v = 0; v < params.vertiports; ++v) {
    const std::string& name = s.regions[sectors + v].name;
    s.adjacency.emplace_back(name, sector_name(hub[v]));
    s.adjacency.emplace_back(sector_name(hub[v]), name);
  }

  // Round trip: vertiport, shortest grid path to a delivery sector, service
  // stop, the same path back.
  std::vector<std::vector<ItineraryLeg>> trips(params.flights);
  int longest = 0;
  for (auto& trip : trips) {
    const int v = static_cast<int>(rng.uniform_int(0, params.vertiports - 1));
    const int goal = static_cast<int>(rng.uniform_int(0, sectors - 1));
    int r = hub[v] / cols, c = hub[v] % cols;
    const int gr = goal / cols, gc = goal % cols;
    const bool columns_first = rng.uniform_int(0, 1) == 1;
    std::vector<int> path{hub[v]};
    auto step_col = [&] { while (c != gc) { c += gc > c ? 1 : -1; path.push_back(r * cols + c); } };
    auto step_row = [&] { while (r != gr) { r += gr > r ? 1 : -1; path.push_back(r * cols + c); } };
    if (columns_first) {
      step_col();
      step_row();
    } else {
      step_row();
      step_col();
    }
    const std::string& port = s.regions[sectors + v].name;
    auto dwell = [&] {
      return static_cast<int>(rng.uniform_int(params.min_dwell, params.max_dwell));
    };
    trip.push_back({port, 0});
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      trip.push_back({sector_name(path[k]), dwell()});
    }
    trip.push_back({sector_name(path.back()),
                    static_cast<int>(rng.uniform_int(params.min_service,
                                                     params.max_service))});
    for (std::size_t k = path.size() - 1; k-- > 0;) {
      trip.push_back({sector_name(path[k]), dwell()});
    }
    trip.push_back({port, 0});
    int duration = 0;
    for (const auto& l : trip) duration += l.dwell;
    longest = std::max(longest, duration + static_cast<int>(trip.size()) - 1);
  }
  // Latest departure that still leaves room for every delayed alternative.
  const int window = params.horizon - longest - params.delay_options;
  require(params.flights == 0 || window >= 1,
          "horizon too short for the generated itineraries");
  std::vector<int> departures(params.flights);
  for (int& d : departures) d = static_cast<int>(rng.uniform_int(1, window));
  std::sort(departures.begin(), departures.end());

  for (int i = 0; i < params.flights; ++i) {
    FlightRequest f;
    f.id = numbered('F', i + 1, 3);
    f.departure = departures[i];
    f.itinerary = std::move(trips[i]);
    f.value = params.value_min + (params.value_max - params.value_min) * rng.uniform01();
    f.delay_options = params.delay_options;
    f.drop_value = params.drop_value;
    f.outside_value = params.outside_value;
    s.requests.push_back(std::move(f));
  }

  // Base capacity: the peak load when every on-time route flies unconstrained.
  for (RegionSpec& r : s.regions) r.capacity = RegionCapacity::uniform(0, 0, 0);
  const auto g = TimeExtendedGraph::build(s.spatial(1.0), s.horizon, s.step_seconds);
  std::vector<int> load(g.num_constrained(), 0);
  for (const FlightRequest& f : s.requests) {
    const auto legs = resolve_itinerary(g, f);
    const auto route = route_from_itinerary(g, f.departure, legs);
    require(route.has_value(), f.id + ": on-time route does not fit");
    for (EdgeId e : route->edges) {
      if (g.edge(e).constrained()) ++load[e];
    }
  }
  int sector_peak = 0, port_peak = 0;
  for (EdgeId e = 0; e < g.num_constrained(); ++e) {
    int& peak = g.edge(e).region < sectors ? sector_peak : port_peak;
    peak = std::max(peak, load[e]);
  }
  for (RegionSpec& r : s.regions) {
    const double c = r.kind == "sector" ? sector_peak : port_peak;
    r.capacity = RegionCapacity::uniform(c, c, c);
  }
  return s;
}

Scenario vertiport_fixture() {
  struct Row {
    const char* id;
    const char* origin;
    const char* dest;
    int dep, arr;
    double route_cap;
    double credits, utility;
  };
  // Departure and arrival capacities are properties of the vertiports and
  // are listed separately below.
  static const Row rows[] = {
      {"AC001", "V007", "V002", 16, 54, 4, 125, 118},
      {"AC002", "V005", "V004", 19, 47, 5, 90, 171},
      {"AC003", "V002", "V001", 16, 21, 1, 135, 172},
      {"AC004", "V002", "V001", 16, 21, 1, 154, 133},
      {"AC005", "V003", "V002", 11, 19, 5, 83, 177},
      {"AC006", "V005", "V007", 18, 68, 3, 199, 148},
      {"AC007", "V003", "V002", 15, 23, 5, 100, 183},
      {"AC008", "V007", "V001", 12, 54, 3, 104, 155},
      {"AC009", "V001", "V005", 13, 34, 1, 67, 189},
      {"AC010", "V001", "V005", 13, 34, 1, 114, 163},
      {"AC011", "V006", "V004", 19, 47, 2, 78, 135},
      {"AC012", "V005", "V001", 16, 37, 3, 90, 124},
      {"AC013", "V002", "V006", 17, 41, 4, 55, 147},
      {"AC014", "V001", "V002", 11, 24, 2, 64, 174},
      {"AC015", "V002", "V001", 16, 21, 1, 65, 194},
      {"AC016", "V007", "V005", 17, 67, 5, 109, 189},
      {"AC017", "V004", "V006", 16, 44, 3, 155, 149},
      {"AC018", "V002", "V007", 18, 56, 2, 103, 165},
      {"AC019", "V004", "V002", 16, 35, 5, 104, 147},
      {"AC020", "V003", "V006", 16, 38, 2, 96, 146},
  };
  // (name, departure capacity, arrival capacity)
  static const std::tuple<const char*, double, double> ports[] = {
      {"V001", 5, 2}, {"V002", 1, 1}, {"V003", 1, 1}, {"V004", 5, 1},
      {"V005", 4, 2}, {"V006", 1, 3}, {"V007", 2, 3},
  };
  // Parking never binds: no itinerary waits at a vertiport and en-route
  // occupancy is limited through the segment's entry and exit slots.
  constexpr double kOpenPark = 20.0;

  Scenario s;
  s.name = "vertiport-reservation";
  s.horizon = 75;
  s.step_seconds = 15.0;
  s.auctions = 1;
  for (const auto& [name, dep, arr] : ports) {
    s.regions.push_back({name, "vertiport", RegionCapacity::uniform(arr, dep, kOpenPark)});
  }
  std::set<std::string> segments;
  for (const Row& r : rows) {
    const std::string seg = std::string(r.origin) + "-" + r.dest;
    if (segments.insert(seg).second) {
      s.regions.push_back(
          {seg, "route", RegionCapacity::uniform(r.route_cap, r.route_cap, kOpenPark)});
      s.adjacency.emplace_back(r.origin, seg);
      s.adjacency.emplace_back(seg, r.dest);
    }
    FlightRequest f;
    f.id = r.id;
    f.departure = r.dep;
    f.itinerary = {{r.origin, 0}, {seg, r.arr - r.dep - 2}, {r.dest, 0}};
    f.value = r.utility;
    f.delay_options = 4;
    f.drop_value = 1.0;
    f.outside_value = 1.0;
    f.initial_budget = r.credits;
    s.requests.push_back(std::move(f));
  }
  s.market.outside_price = 10.0;
  s.market.grant_min = 0;
  s.market.grant_max = 0;
  s.solver.beta = 50.0;
  s.solver.inner_iterations = 2;
  s.solver.max_outer = 2000;
  s.solver.tol_ce = 1e-4;
  s.solver.tol_ice = 1e-4;
  s.solver.tol_eae = 1e-4;
  return s;
}

}  // namespace airmarket
