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

#include "airmarket/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "airmarket/random.hpp"

namespace airmarket {

const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kFisher:
      return "fisher";
    case Mechanism::kClockBudget:
      return "clock-budget";
    case Mechanism::kClockProfit:
      return "clock-profit";
  }
  return "?";
}

Mechanism parse_mechanism(const std::string& name) {
  if (name == "fisher") return Mechanism::kFisher;
  if (name == "clock-budget") return Mechanism::kClockBudget;
  if (name == "clock-profit") return Mechanism::kClockProfit;
  throw ModelError("unknown mechanism '" + name + "'");
}

std::vector<int> auction_times(int horizon, int auctions) {
  if (auctions < 1 || auctions > horizon) {
    throw ModelError("auction count must lie in [1, horizon]");
  }
  const int stride = horizon / auctions;
  std::vector<int> t(auctions);
  for (int i = 0; i < auctions; ++i) t[i] = i * stride + 1;
  return t;
}

void CampaignConfig::validate(int horizon) const {
  if (auctions < 1 || auctions > horizon) {
    throw ModelError("auction count must lie in [1, horizon]");
  }
  if (!(capacity_fraction > 0.0 && capacity_fraction <= 1.0)) {
    throw ModelError("capacity fraction must lie in (0, 1]");
  }
  solver.validate();
  if (clock_max_rounds < 1) throw ModelError("clock round limit must be >= 1");
  if (market.grant_min < 0 || market.grant_max < market.grant_min) {
    throw ModelError("grant range must satisfy 0 <= min <= max");
  }
  if (market.max_rebases < 0) throw ModelError("max_rebases must be >= 0");
  if (!(market.outside_price > 0.0)) throw ModelError("outside price must be positive");
}

CampaignConfig campaign_config(const Scenario& s) {
  CampaignConfig c;
  c.auctions = s.auctions;
  c.capacity_fraction = s.capacity_fraction;
  c.rounding = s.rounding;
  c.market = s.market;
  c.seed = s.seed;
  c.solver.beta = s.solver.beta;
  c.solver.inner_iterations = s.solver.inner_iterations;
  c.solver.max_outer = s.solver.max_outer;
  c.solver.tol_ce = s.solver.tol_ce;
  c.solver.tol_ice = s.solver.tol_ice;
  c.solver.tol_eae = s.solver.tol_eae;
  c.solver.outside_price = s.market.outside_price;
  return c;
}

VehicleRequest build_request(const TimeExtendedGraph& g, const FlightRequest& f,
                             int start, int rebases, double budget,
                             const MarketParams& market) {
  VehicleRequest r;
  r.id = f.id;
  r.drop_value = f.drop_value;
  r.outside_value = f.outside_value;
  r.budget = budget;
  const std::vector<Leg> legs = resolve_itinerary(g, f);
  const double base = f.value * std::pow(market.rebase_factor, rebases);
  for (int k = 0; k <= f.delay_options; ++k) {
    auto route = route_from_itinerary(g, start + k, legs,
                                      f.id + "+" + std::to_string(k));
    if (!route) continue;
    r.menu.push_back(std::move(*route));
    r.values.push_back(base * std::pow(market.delay_factor, k));
  }
  return r;
}

namespace {

struct PoolEntry {
  int agent;
  VehicleRequest request;
};

// Pool members without a fitting route are finalized before the auction.
struct Pool {
  std::vector<PoolEntry> entries;
  std::vector<int> unroutable;
};

struct MechanismOutput {
  IntegralOutcome outcome;
  std::vector<double> prices;  // prices the payments were computed at
};

MechanismOutput run_mechanism(const Market& market, const CampaignConfig& cfg,
                              AuctionReport& rep, FractionalResult* keep) {
  MechanismOutput out;
  const double p_o = cfg.market.outside_price;
  if (cfg.mechanism == Mechanism::kFisher) {
    SolverConfig sc = cfg.solver;
    sc.outside_price = p_o;
    FractionalResult fr = run_algorithm1(market, sc);
    rep.converged = fr.converged;
    rep.iterations = fr.iterations;
    rep.outer_iterations = fr.outer_iterations;
    if (!fr.trace.empty()) {
      rep.ce = fr.trace.back().ce;
      rep.ice = fr.trace.back().ice;
      rep.eae = fr.trace.back().eae;
    }
    const RankedList rank = rank_vehicles(market, fr.demand);
    out.outcome = run_algorithm2(market, fr.prices, p_o, rank);
    out.prices = fr.prices;
    rep.removed_goods = static_cast<int>(out.outcome.removed.size());
    rep.trace = fr.trace;
    if (keep != nullptr) *keep = std::move(fr);
  } else {
    ClockConfig cc;
    cc.beta = cfg.solver.beta;
    cc.max_rounds = cfg.clock_max_rounds;
    cc.mode = cfg.mechanism == Mechanism::kClockBudget ? BidMode::kBudget
                                                       : BidMode::kProfit;
    cc.outside_price = p_o;
    cc.policy = cfg.solver.policy;
    ClockResult cr = run_clock_auction(market, cc);
    rep.converged = cr.converged;
    rep.clock_rounds = cr.rounds;
    if (!cr.converged) {
      throw ModelError("clock auction reached the round limit");
    }
    out.prices = cr.outcome.prices;
    out.outcome = std::move(cr.outcome);
  }
  for (double p : out.prices) rep.max_price = std::max(rep.max_price, p);
  rep.mce = metric_mce_after_integral(market, out.outcome, out.prices);
  return out;
}

}  // namespace

CampaignResult run_campaign(const Scenario& scenario,
                            const CampaignConfig& config) {
  scenario.validate();
  config.validate(scenario.horizon);
  Scenario scaled = scenario;
  scaled.rounding = config.rounding;
  const TimeExtendedGraph g = TimeExtendedGraph::build(
      scaled.spatial(config.capacity_fraction), scenario.horizon,
      scenario.step_seconds);
  const std::vector<int> times = auction_times(scenario.horizon, config.auctions);
  const int I = config.auctions;
  const MarketParams& mp = config.market;

  CampaignResult res;
  const std::size_t U = scenario.requests.size();
  res.agents.resize(U);
  for (std::size_t u = 0; u < U; ++u) {
    res.agents[u].id = scenario.requests[u].id;
    res.agents[u].budget = scenario.requests[u].initial_budget;
  }
  std::vector<double> remaining = g.capacities();
  std::vector<AcceptedBundle> accepted;
  std::vector<int> carried;  // rebased into the next auction, in agent order

  for (int i = 0; i < I; ++i) {
    AuctionReport rep;
    rep.index = i;
    rep.time = times[i];
    const int window_end = i + 1 < I ? times[i + 1] : scenario.horizon + 1;

    std::vector<int> members = carried;
    rep.rebased_in = static_cast<int>(carried.size());
    carried.clear();
    for (std::size_t u = 0; u < U; ++u) {
      const int d = scenario.requests[u].departure;
      if (d >= times[i] && d < window_end) {
        members.push_back(static_cast<int>(u));
        ++rep.fresh;
      }
    }
    std::sort(members.begin(), members.end());
    rep.pool = static_cast<int>(members.size());

    Pool pool;
    for (int u : members) {
      AgentRecord& a = res.agents[u];
      const FlightRequest& f = scenario.requests[u];
      if (mp.grant_max > 0 && (a.rebases == 0 || mp.grant_rebased)) {
        Rng rng{config.seed, static_cast<std::uint64_t>(u),
                static_cast<std::uint64_t>(i)};
        a.budget += static_cast<double>(rng.uniform_int(mp.grant_min, mp.grant_max));
      }
      const int start = std::max(f.departure, times[i]);
      VehicleRequest r = build_request(g, f, start, a.rebases, a.budget, mp);
      if (r.menu.empty()) {
        pool.unroutable.push_back(u);
      } else {
        pool.entries.push_back({u, std::move(r)});
      }
    }

    std::vector<AgentModel> models;
    for (const PoolEntry& e : pool.entries) models.emplace_back(g, e.request);
    std::vector<char> served(pool.entries.size(), 0);
    if (!models.empty()) {
      const Market market(g, std::move(models), remaining);
      AuctionSnapshot snap;
      try {
        const MechanismOutput mo = run_mechanism(
            market, config, rep, config.keep_snapshots ? &snap.result : nullptr);
        const SafetyReport audit =
            audit_outcome(market, mo.outcome, mo.prices, mp.outside_price);
        rep.safety_violations = static_cast<int>(audit.violations.size());
        const auto bundles =
            bundles_of(market, mo.outcome, mo.prices, mp.outside_price);
        for (std::size_t k = 0; k < pool.entries.size(); ++k) {
          const AgentOutcome& o = mo.outcome.agents[k];
          if (o.route < 0) continue;
          AgentRecord& a = res.agents[pool.entries[k].agent];
          const Route& route = pool.entries[k].request.menu[o.route];
          a.state = AgentState::kAllocated;
          a.auction = i;
          a.route = o.route;
          a.start_time = route.start_time;
          a.delay = o.delay;
          a.payment = o.route_payment;
          a.edges = route.edges;
          a.budget -= o.route_payment;
          if (a.budget < 0.0) {
            if (a.budget < -1e-9 * std::max(1.0, o.route_payment)) {
              throw std::logic_error("negative budget after settlement for " + a.id);
            }
            a.budget = 0.0;
          }
          for (EdgeId e : route.edges) {
            if (g.edge(e).constrained()) remaining[e] -= 1.0;
          }
          accepted.push_back(bundles[k]);
          ++(o.status == AllocationStatus::kPreferred ? rep.allocated : rep.delayed);
          served[k] = 1;
        }
      } catch (const ModelError& err) {
        rep.failure = err.what();
      }
      if (config.keep_snapshots) {
        snap.index = i;
        for (const PoolEntry& e : pool.entries) snap.requests.push_back(e.request);
        snap.capacity = market.capacity();
        res.snapshots.push_back(std::move(snap));
      }
    }

    // Everyone not served is rebased or, out of attempts, never allocated.
    std::vector<int> unserved = pool.unroutable;
    for (std::size_t k = 0; k < pool.entries.size(); ++k) {
      if (!served[k]) unserved.push_back(pool.entries[k].agent);
    }
    std::sort(unserved.begin(), unserved.end());
    for (int u : unserved) {
      AgentRecord& a = res.agents[u];
      const bool routable =
          std::find(pool.unroutable.begin(), pool.unroutable.end(), u) ==
          pool.unroutable.end();
      if (routable && a.rebases < mp.max_rebases && i + 1 < I) {
        ++a.rebases;
        ++(a.rebases == 1 ? rep.rebased_once : rep.rebased_twice);
        carried.push_back(u);
      } else {
        a.state = AgentState::kNeverAllocated;
        ++rep.dropped;
      }
    }
    res.auctions.push_back(std::move(rep));
  }

  res.audit = audit_bundles(g, g.capacities(), accepted);

  CampaignMetrics& m = res.metrics;
  m.agents = static_cast<int>(U);
  double delay_sum = 0.0;
  for (const AgentRecord& a : res.agents) {
    m.num_times_rebased += a.rebases;
    if (a.rebases > 0) ++m.num_rebased;
    if (a.state == AgentState::kAllocated) {
      ++m.allocated;
      if (a.delay > 0) {
        ++m.num_delayed;
        delay_sum += a.delay;
      } else {
        ++m.on_time;
      }
    } else {
      ++m.never_allocated;
    }
  }
  m.avg_delay = m.num_delayed > 0 ? delay_sum / m.num_delayed : 0.0;
  m.avg_times_rebased =
      m.num_rebased > 0 ? static_cast<double>(m.num_times_rebased) / m.num_rebased : 0.0;
  int held = 0;
  long iterations = 0;
  double mce_sum = 0.0;
  for (const AuctionReport& r : res.auctions) {
    m.safety_violations += r.safety_violations;
    if (!r.failure.empty()) ++m.failures;
    if (r.pool == 0) continue;
    ++held;
    iterations += r.iterations;
    m.max_iterations = std::max(m.max_iterations, r.iterations);
    m.max_mce = std::max(m.max_mce, r.mce);
    mce_sum += r.mce;
    m.all_converged = m.all_converged && r.converged && r.failure.empty();
  }
  m.safety_violations += static_cast<int>(res.audit.violations.size());
  m.mean_iterations = held > 0 ? static_cast<double>(iterations) / held : 0.0;
  m.mean_mce = held > 0 ? mce_sum / held : 0.0;
  return res;
}

}  // namespace airmarket
