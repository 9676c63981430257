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

// Simultaneous ascending clock auctions over the same goods: every round all
// agents bid for one bundle at the current prices, and each over-subscribed
// good gets more expensive by a fixed increment.

#ifndef AIRMARKET_CLOCK_AUCTION_HPP_
#define AIRMARKET_CLOCK_AUCTION_HPP_

#include <span>
#include <vector>

#include "airmarket/agents.hpp"
#include "airmarket/fisher_admm.hpp"
#include "airmarket/integral_alloc.hpp"

namespace airmarket {

enum class BidMode { kBudget, kProfit };

const char* to_string(BidMode mode);

// The integral demand problem at the current prices.
IntegralChoice bid_budget_based(const AgentModel& agent,
                                std::span<const double> prices,
                                double outside_price);

// Maximizes value minus price over affordable routes and the drop option.
// Outside units are bought only when v_o >= p_o, with the leftover budget.
// `utility` of the result holds the profit.
IntegralChoice bid_profit_based(const AgentModel& agent,
                                std::span<const double> prices,
                                double outside_price);

struct ClockConfig {
  double beta = 50.0;  // price increment
  long max_rounds = 1'000'000;
  BidMode mode = BidMode::kBudget;
  double outside_price = 10.0;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  void validate() const;
};

struct ClockResult {
  IntegralOutcome outcome;  // final bids; removed is always empty
  long rounds = 0;
  bool converged = false;  // false when max_rounds was reached
};

ClockResult run_clock_auction(const Market& market, const ClockConfig& config);

}  // namespace airmarket

#endif  // AIRMARKET_CLOCK_AUCTION_HPP_
