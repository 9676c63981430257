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

// Receding-horizon campaign: I auctions over one shared time-extended graph.
// Each auction serves the flights that asked to depart in its window plus
// the ones rebased from the previous auction; capacity consumed by accepted
// routes is never restored and unspent credits carry over.

#ifndef AIRMARKET_HORIZON_HPP_
#define AIRMARKET_HORIZON_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "airmarket/audit.hpp"
#include "airmarket/clock_auction.hpp"
#include "airmarket/fisher_admm.hpp"
#include "airmarket/integral_alloc.hpp"
#include "airmarket/scenario.hpp"

namespace airmarket {

enum class Mechanism { kFisher, kClockBudget, kClockProfit };

const char* to_string(Mechanism m);
Mechanism parse_mechanism(const std::string& name);

// 1-indexed start of each auction window: (i-1) * floor(T/I) + 1.
std::vector<int> auction_times(int horizon, int auctions);

struct CampaignConfig {
  int auctions = 1;
  double capacity_fraction = 1.0;
  RoundingMode rounding = RoundingMode::kHalfUp;
  Mechanism mechanism = Mechanism::kFisher;
  SolverConfig solver;  // beta is also the clock increment
  long clock_max_rounds = 1'000'000;
  MarketParams market;
  std::uint64_t seed = 0;
  // Keep the fractional inputs and outputs of every auction for auditing.
  bool keep_snapshots = false;

  void validate(int horizon) const;
};

// Settings stored in the scenario.
CampaignConfig campaign_config(const Scenario& s);

// The menu an agent brings to an auction: the itinerary started at `start`
// and delayed by 1..delay_options steps, valued at
// value * rebase_factor^rebases * delay_factor^k. Starts that do not fit
// the horizon are skipped, so the menu may be empty.
VehicleRequest build_request(const TimeExtendedGraph& g, const FlightRequest& f,
                             int start, int rebases, double budget,
                             const MarketParams& market);

enum class AgentState { kWaiting, kAllocated, kNeverAllocated };

struct AgentRecord {
  std::string id;
  AgentState state = AgentState::kWaiting;
  int rebases = 0;
  double budget = 0.0;  // current credits; after the last settlement
  int auction = -1;     // auction that allocated it (0-based)
  int route = -1;
  int start_time = 0;
  int delay = 0;        // menu offset of the accepted route
  double payment = 0.0;
  std::vector<EdgeId> edges;  // accepted route
};

struct AuctionReport {
  int index = 0;  // 0-based
  int time = 0;   // t_i
  int pool = 0;
  int fresh = 0;
  int rebased_in = 0;
  int allocated = 0;  // preferred route
  int delayed = 0;
  int rebased_once = 0;
  int rebased_twice = 0;
  int dropped = 0;  // never allocated, decided in this auction
  bool converged = true;
  int iterations = 0;
  int outer_iterations = 0;
  long clock_rounds = 0;
  double ce = 0.0, ice = 0.0, eae = 0.0;
  double max_price = 0.0;
  double mce = 0.0;
  int removed_goods = 0;
  int safety_violations = 0;
  std::string failure;  // non-empty when the mechanism threw
  std::vector<IterationRecord> trace;
};

struct AuctionSnapshot {
  int index = 0;
  std::vector<VehicleRequest> requests;
  std::vector<double> capacity;  // remaining capacity per edge
  FractionalResult result;
};

// Campaign metrics, the mechanism comparison columns among them.
struct CampaignMetrics {
  int agents = 0;
  int allocated = 0;
  int on_time = 0;
  int num_times_rebased = 0;   // rebase events
  int num_delayed = 0;         // allocated on a delayed menu route
  double avg_delay = 0.0;      // over delayed agents, in time steps
  int num_rebased = 0;         // agents rebased at least once
  double avg_times_rebased = 0.0;  // over agents rebased at least once
  int never_allocated = 0;
  double max_mce = 0.0;
  double mean_mce = 0.0;
  double mean_iterations = 0.0;  // ADMM iterations per auction held
  int max_iterations = 0;
  bool all_converged = true;
  int failures = 0;
  int safety_violations = 0;  // per-auction and campaign-wide audits
};

struct CampaignResult {
  std::vector<AuctionReport> auctions;
  std::vector<AgentRecord> agents;
  CampaignMetrics metrics;
  SafetyReport audit;  // all accepted routes against the full capacity
  std::vector<AuctionSnapshot> snapshots;
};

CampaignResult run_campaign(const Scenario& scenario,
                            const CampaignConfig& config);

}  // namespace airmarket

#endif  // AIRMARKET_HORIZON_HPP_
