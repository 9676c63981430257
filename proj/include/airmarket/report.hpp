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

// Campaign artifacts: the deterministic JSON summary, per-auction, trace and
// allocation CSVs, the mechanism comparison CSV, and the fractional
// snapshots that `verify` re-checks after the fact.

#ifndef AIRMARKET_REPORT_HPP_
#define AIRMARKET_REPORT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "airmarket/horizon.hpp"
#include "airmarket/verify.hpp"

namespace airmarket {

// RFC-4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view text);

// Everything in it is a function of scenario, config and seed: no wall
// clock, host or thread count.
std::string campaign_summary_json(const Scenario& scenario,
                                  const CampaignConfig& config,
                                  const CampaignResult& result);

void write_auctions_csv(std::ostream& out, const CampaignResult& result);
void write_traces_csv(std::ostream& out, const CampaignResult& result);
void write_allocations_csv(std::ostream& out, const CampaignResult& result);

// One row per summary: identifiers followed by the comparison metrics.
struct ComparisonRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string mechanism;
  double capacity_fraction = 0.0;
  CampaignMetrics metrics;
};
ComparisonRow comparison_row(const std::string& summary_json);
extern const char* const kComparisonHeader;
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

// Fractional inputs and outputs of every Fisher auction. The stored
// verification tolerances are `tol_factor` times the largest allocation
// tolerance (ICE, EAE) and times the CE tolerance in credits.
std::string snapshots_json(const Scenario& scenario, const CampaignConfig& config,
                           const CampaignResult& result, double tol_factor = 10.0);

struct SnapshotCheck {
  int index = 0;
  int agents = 0;
  KktCertificate certificate;
};

// Rebuilds each auction's market from the scenario and the snapshot file and
// certifies the stored demand and prices. A positive `tol` overrides both
// stored tolerances. Throws ModelError on malformed input.
std::vector<SnapshotCheck> verify_snapshots(const Scenario& scenario,
                                            const std::string& snapshots,
                                            double tol = 0.0);

}  // namespace airmarket

#endif  // AIRMARKET_REPORT_HPP_
