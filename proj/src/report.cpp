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

#include "airmarket/report.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace airmarket {

using nlohmann::json;

namespace {

const char* state_name(AgentState s) {
  switch (s) {
    case AgentState::kWaiting:
      return "waiting";
    case AgentState::kAllocated:
      return "allocated";
    case AgentState::kNeverAllocated:
      return "never_allocated";
  }
  return "?";
}

// Shortest round-trip text, so equal doubles print equally and differ
// otherwise.
std::string num(double v) {
  return json(v).dump();
}

json metrics_json(const CampaignMetrics& m) {
  return {{"agents", m.agents},
          {"allocated", m.allocated},
          {"on_time", m.on_time},
          {"num_times_rebased", m.num_times_rebased},
          {"num_delayed", m.num_delayed},
          {"avg_delay", m.avg_delay},
          {"num_rebased", m.num_rebased},
          {"avg_times_rebased", m.avg_times_rebased},
          {"never_allocated", m.never_allocated},
          {"max_mce", m.max_mce},
          {"mean_mce", m.mean_mce},
          {"mean_iterations", m.mean_iterations},
          {"max_iterations", m.max_iterations},
          {"all_converged", m.all_converged},
          {"failures", m.failures},
          {"safety_violations", m.safety_violations}};
}

CampaignMetrics metrics_from(const json& j) {
  CampaignMetrics m;
  m.agents = j.at("agents");
  m.allocated = j.at("allocated");
  m.on_time = j.at("on_time");
  m.num_times_rebased = j.at("num_times_rebased");
  m.num_delayed = j.at("num_delayed");
  m.avg_delay = j.at("avg_delay");
  m.num_rebased = j.at("num_rebased");
  m.avg_times_rebased = j.at("avg_times_rebased");
  m.never_allocated = j.at("never_allocated");
  m.max_mce = j.at("max_mce");
  m.mean_mce = j.at("mean_mce");
  m.mean_iterations = j.at("mean_iterations");
  m.max_iterations = j.at("max_iterations");
  m.all_converged = j.at("all_converged");
  m.failures = j.at("failures");
  m.safety_violations = j.at("safety_violations");
  return m;
}

json parse_or_throw(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string campaign_summary_json(const Scenario& scenario,
                                  const CampaignConfig& config,
                                  const CampaignResult& result) {
  json j;
  j["scenario"] = scenario.name;
  j["scenario_seed"] = scenario.seed;
  j["seed"] = config.seed;
  j["mechanism"] = to_string(config.mechanism);
  j["capacity_fraction"] = config.capacity_fraction;
  j["rounding"] = to_string(config.rounding);
  j["auctions"] = config.auctions;
  j["solver"] = {{"beta", config.solver.beta},
                 {"inner_iterations", config.solver.inner_iterations},
                 {"max_outer", config.solver.max_outer},
                 {"tol_ce", config.solver.tol_ce},
                 {"tol_ce_fraction", config.solver.tol_ce_fraction},
                 {"tol_ice", config.solver.tol_ice},
                 {"tol_eae", config.solver.tol_eae},
                 {"tol_fixed_point", config.solver.tol_fixed_point},
                 {"outside_price", config.market.outside_price},
                 {"clock_max_rounds", config.clock_max_rounds}};
  j["metrics"] = metrics_json(result.metrics);
  j["audit_violations"] = result.audit.violations.size();
  json rows = json::array();
  for (const AuctionReport& a : result.auctions) {
    rows.push_back({{"index", a.index},
                    {"time", a.time},
                    {"pool", a.pool},
                    {"fresh", a.fresh},
                    {"rebased_in", a.rebased_in},
                    {"allocated", a.allocated},
                    {"delayed", a.delayed},
                    {"rebased_once", a.rebased_once},
                    {"rebased_twice", a.rebased_twice},
                    {"dropped", a.dropped},
                    {"converged", a.converged},
                    {"iterations", a.iterations},
                    {"outer_iterations", a.outer_iterations},
                    {"clock_rounds", a.clock_rounds},
                    {"ce", a.ce},
                    {"ice", a.ice},
                    {"eae", a.eae},
                    {"max_price", a.max_price},
                    {"mce", a.mce},
                    {"removed_goods", a.removed_goods},
                    {"safety_violations", a.safety_violations},
                    {"failure", a.failure}});
  }
  j["auction_reports"] = rows;
  json agents = json::array();
  for (const AgentRecord& a : result.agents) {
    agents.push_back({{"id", a.id},
                      {"state", state_name(a.state)},
                      {"auction", a.auction},
                      {"route", a.route},
                      {"start_time", a.start_time},
                      {"delay", a.delay},
                      {"rebases", a.rebases},
                      {"payment", a.payment},
                      {"budget", a.budget}});
  }
  j["agents"] = agents;
  return j.dump(2) + "\n";
}

void write_auctions_csv(std::ostream& out, const CampaignResult& result) {
  out << "auction,time,pool,fresh,rebased_in,allocated,delayed,rebased_once,"
         "rebased_twice,dropped,converged,iterations,outer_iterations,"
         "clock_rounds,ce,ice,eae,max_price,mce,removed_goods,"
         "safety_violations,failure\n";
  for (const AuctionReport& a : result.auctions) {
    out << a.index << ',' << a.time << ',' << a.pool << ',' << a.fresh << ','
        << a.rebased_in << ',' << a.allocated << ',' << a.delayed << ','
        << a.rebased_once << ',' << a.rebased_twice << ',' << a.dropped << ','
        << (a.converged ? 1 : 0) << ',' << a.iterations << ','
        << a.outer_iterations << ',' << a.clock_rounds << ',' << num(a.ce)
        << ',' << num(a.ice) << ',' << num(a.eae) << ',' << num(a.max_price)
        << ',' << num(a.mce) << ',' << a.removed_goods << ','
        << a.safety_violations << ',' << csv_field(a.failure) << '\n';
  }
}

void write_traces_csv(std::ostream& out, const CampaignResult& result) {
  out << "auction,iteration,outer,inner,ce,ice,eae,max_price,omega_max,"
         "fixed_point\n";
  for (const AuctionReport& a : result.auctions) {
    for (const IterationRecord& r : a.trace) {
      out << a.index << ',' << r.iteration << ',' << r.outer << ',' << r.inner
          << ',' << num(r.ce) << ',' << num(r.ice) << ',' << num(r.eae) << ','
          << num(r.max_price) << ',' << num(r.omega_max) << ','
          << num(r.fixed_point) << '\n';
    }
  }
}

void write_allocations_csv(std::ostream& out, const CampaignResult& result) {
  out << "agent,state,auction,route,start_time,delay,rebases,payment,budget,"
         "edges\n";
  for (const AgentRecord& a : result.agents) {
    std::string edges;
    for (std::size_t k = 0; k < a.edges.size(); ++k) {
      if (k > 0) edges += ' ';
      edges += std::to_string(a.edges[k]);
    }
    out << csv_field(a.id) << ',' << state_name(a.state) << ',' << a.auction
        << ',' << a.route << ',' << a.start_time << ',' << a.delay << ','
        << a.rebases << ',' << num(a.payment) << ',' << num(a.budget) << ','
        << edges << '\n';
  }
}

const char* const kComparisonHeader =
    "scenario,seed,mechanism,capacity_fraction,num_times_rebased,"
    "num_delayed,avg_delay,num_rebased,avg_times_rebased,never_allocated";

ComparisonRow comparison_row(const std::string& summary_json) {
  const json j = parse_or_throw(summary_json, "summary");
  try {
    ComparisonRow r;
    r.scenario = j.at("scenario");
    r.seed = j.at("seed");
    r.mechanism = j.at("mechanism");
    r.capacity_fraction = j.at("capacity_fraction");
    r.metrics = metrics_from(j.at("metrics"));
    return r;
  } catch (const json::exception& e) {
    throw ModelError(std::string("summary: ") + e.what());
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << kComparisonHeader << '\n';
  for (const ComparisonRow& r : rows) {
    const CampaignMetrics& m = r.metrics;
    out << csv_field(r.scenario) << ',' << r.seed << ',' << csv_field(r.mechanism)
        << ',' << num(r.capacity_fraction) << ',' << m.num_times_rebased << ','
        << m.num_delayed << ',' << num(m.avg_delay) << ',' << m.num_rebased
        << ',' << num(m.avg_times_rebased) << ',' << m.never_allocated << '\n';
  }
}

std::string snapshots_json(const Scenario& scenario, const CampaignConfig& config,
                           const CampaignResult& result, double tol_factor) {
  json j;
  j["scenario"] = scenario.name;
  j["capacity_fraction"] = config.capacity_fraction;
  j["rounding"] = to_string(config.rounding);
  j["outside_price"] = config.market.outside_price;
  json list = json::array();
  for (const AuctionSnapshot& s : result.snapshots) {
    if (s.result.demand.size() != s.requests.size()) continue;
    const double tol_alloc =
        tol_factor * std::max(config.solver.tol_ice, config.solver.tol_eae);
    const double tol_credits = tol_factor * s.result.tol_ce;
    json requests = json::array();
    std::vector<EdgeId> used;
    for (const VehicleRequest& r : s.requests) {
      json menu = json::array();
      for (const Route& route : r.menu) {
        menu.push_back({{"label", route.label}, {"edges", route.edges}});
        used.insert(used.end(), route.edges.begin(), route.edges.end());
      }
      requests.push_back({{"id", r.id},
                          {"menu", menu},
                          {"values", r.values},
                          {"preferred", r.preferred},
                          {"drop_value", r.drop_value},
                          {"outside_value", r.outside_value},
                          {"budget", r.budget}});
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    json capacity = json::array();
    json prices = json::array();
    for (EdgeId e : used) {
      if (s.capacity[e] == kUnlimited) continue;
      capacity.push_back({e, s.capacity[e]});
      if (s.result.prices[e] != 0.0) prices.push_back({e, s.result.prices[e]});
    }
    json demand = json::array();
    for (const RouteDemand& d : s.result.demand) {
      demand.push_back({{"routes", d.routes}, {"outside", d.outside}, {"drop", d.drop}});
    }
    list.push_back({{"index", s.index},
                    {"tol", tol_alloc},
                    {"credit_tol", tol_credits},
                    {"converged", s.result.converged},
                    {"requests", requests},
                    {"capacity", capacity},
                    {"prices", prices},
                    {"demand", demand}});
  }
  j["auctions"] = list;
  return j.dump() + "\n";
}

std::vector<SnapshotCheck> verify_snapshots(const Scenario& scenario,
                                            const std::string& snapshots,
                                            double tol) {
  const json j = parse_or_throw(snapshots, "snapshots");
  std::vector<SnapshotCheck> out;
  try {
    Scenario scaled = scenario;
    scaled.rounding = parse_rounding(j.at("rounding"));
    const TimeExtendedGraph g = TimeExtendedGraph::build(
        scaled.spatial(j.at("capacity_fraction").get<double>()), scenario.horizon,
        scenario.step_seconds);
    const double p_o = j.at("outside_price");
    for (const json& a : j.at("auctions")) {
      std::vector<AgentModel> models;
      for (const json& r : a.at("requests")) {
        VehicleRequest req;
        req.id = r.at("id");
        for (const json& route : r.at("menu")) {
          req.menu.push_back(make_route(g, route.at("edges").get<std::vector<EdgeId>>(),
                                        route.at("label").get<std::string>()));
        }
        req.values = r.at("values").get<std::vector<double>>();
        req.preferred = r.at("preferred");
        req.drop_value = r.at("drop_value");
        req.outside_value = r.at("outside_value");
        req.budget = r.at("budget");
        req.validate();
        models.emplace_back(g, std::move(req));
      }
      std::vector<double> capacity = g.capacities();
      std::vector<double> prices(g.num_edges(), 0.0);
      const auto set = [&](const json& pairs, std::vector<double>& target) {
        for (const json& p : pairs) {
          const EdgeId e = p.at(0);
          if (!g.contains(e)) throw ModelError("edge id out of range");
          target[e] = p.at(1);
        }
      };
      set(a.at("capacity"), capacity);
      set(a.at("prices"), prices);
      const Market market(g, std::move(models), std::move(capacity));
      const json& demand = a.at("demand");
      if (demand.size() != market.num_agents()) {
        throw ModelError("demand count does not match the agent count");
      }
      std::vector<AllocationVector> x;
      for (std::size_t u = 0; u < market.num_agents(); ++u) {
        RouteDemand d;
        d.routes = demand[u].at("routes").get<std::vector<double>>();
        d.outside = demand[u].at("outside");
        d.drop = demand[u].at("drop");
        if (d.routes.size() != market.agents()[u].num_routes()) {
          throw ModelError("demand size does not match the menu");
        }
        x.push_back(market.agents()[u].expand(d));
      }
      SnapshotCheck c;
      c.index = a.at("index");
      c.agents = static_cast<int>(market.num_agents());
      const VerifyTolerance t =
          tol > 0.0 ? VerifyTolerance{tol, tol}
                    : VerifyTolerance{a.at("tol"), a.at("credit_tol")};
      c.certificate = verify_fractional_ce(market, x, prices, p_o, t);
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("snapshots: ") + e.what());
  }
  return out;
}

}  // namespace airmarket
