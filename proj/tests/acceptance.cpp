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

// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. Safety (criterion 7) is re-checked on every campaign
// the other criteria run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "airmarket/horizon.hpp"
#include "airmarket/report.hpp"
#include "airmarket/verify.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace airmarket {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Recounts loads and menu membership from the agent records alone, against
// the full scaled capacity, without the library's audit code.
struct SafetyTally {
  int campaigns = 0;
  long bundles = 0;
  long violations = 0;
  std::vector<std::string> notes;

  void check(const Scenario& s, const CampaignConfig& c, const CampaignResult& r) {
    ++campaigns;
    Scenario scaled = s;
    scaled.rounding = c.rounding;
    const TimeExtendedGraph g = TimeExtendedGraph::build(
        scaled.spatial(c.capacity_fraction), s.horizon, s.step_seconds);
    const std::vector<int> times = auction_times(s.horizon, c.auctions);
    std::vector<double> load(g.num_edges(), 0.0);
    long before = violations;
    for (std::size_t u = 0; u < r.agents.size(); ++u) {
      const AgentRecord& a = r.agents[u];
      if (a.state != AgentState::kAllocated) continue;
      ++bundles;
      const FlightRequest& f = s.requests[u];
      const VehicleRequest menu = build_request(
          g, f, std::max(f.departure, times[a.auction]), a.rebases, 0.0, c.market);
      if (a.route < 0 || a.route >= static_cast<int>(menu.menu.size()) ||
          menu.menu[a.route].edges != a.edges) {
        ++violations;
      }
      if (!validate_route(g, a.edges).valid) ++violations;
      if (a.budget < 0.0 || a.payment < 0.0) ++violations;
      for (EdgeId e : a.edges) load[e] += 1.0;
    }
    for (EdgeId e = 0; e < g.num_constrained(); ++e) {
      if (load[e] > g.edge(e).capacity) ++violations;
    }
    violations += r.metrics.safety_violations;
    violations += static_cast<long>(r.audit.violations.size());
    if (violations > before) {
      notes.push_back(fmt("%s %s %.2f", s.name.c_str(), to_string(c.mechanism),
                          c.capacity_fraction));
    }
  }
};

SafetyTally g_safety;

Scenario delivery_stream(std::uint64_t seed, int flights = 177) {
  GeneratorParams p;
  p.seed = seed;
  p.flights = flights;
  return generate_scenario(p);
}

CampaignResult campaign(const Scenario& s, Mechanism m, double fraction,
                        int auctions, std::uint64_t seed) {
  CampaignConfig c = campaign_config(s);
  c.mechanism = m;
  c.capacity_fraction = fraction;
  c.auctions = auctions;
  c.seed = seed;
  CampaignResult r = run_campaign(s, c);
  g_safety.check(s, c, r);
  return r;
}

// Criterion 1 data, reused by criterion 10.
struct UncontestedSweep {
  std::vector<int> agents, iterations, never;
  double seconds = 0.0;
};

UncontestedSweep sweep_uncontested() {
  UncontestedSweep out;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 10; n <= 100; n += 10) {
    const Scenario s = delivery_stream(1, n);
    const CampaignResult r = campaign(s, Mechanism::kFisher, 1.0, 1, 1);
    out.agents.push_back(n);
    out.iterations.push_back(r.metrics.max_iterations);
    out.never.push_back(r.metrics.never_allocated);
  }
  out.seconds = seconds_since(t0);
  return out;
}

Verdict criterion1(const UncontestedSweep& sw) {
  Verdict v;
  v.pass = sw.seconds < 60.0;
  std::string its, never;
  for (std::size_t k = 0; k < sw.agents.size(); ++k) {
    v.pass = v.pass && sw.iterations[k] <= 15 && sw.never[k] == 0;
    its += fmt("%s%d", k ? "," : "", sw.iterations[k]);
    never += fmt("%s%d", k ? "," : "", sw.never[k]);
  }
  v.detail = fmt("n=10..100 iterations [%s] (limit 15), never allocated [%s], %.1fs",
                 its.c_str(), never.c_str(), sw.seconds);
  return v;
}

Verdict criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  int pass = 0;
  double worst = 0.0;
  std::string failures;
  for (int trial = 0; trial < 50; ++trial) {
    const int regions = 3 + trial % 2, T = 8, n = 2 + trial % 4;
    const auto g = TimeExtendedGraph::build(testing::line_graph(regions, 1.0), T, 15.0);
    std::vector<AgentModel> agents;
    while (static_cast<int>(agents.size()) < n) {
      VehicleRequest r = testing::random_request(
          g, rng, 1 + (trial + static_cast<int>(agents.size())) % 3,
          "a" + std::to_string(agents.size()));
      if (!r.menu.empty()) agents.emplace_back(g, std::move(r));
    }
    const Market m(g, std::move(agents));
    SolverConfig c;
    c.tol_ce = 1e-3;
    c.tol_fixed_point = 1e-4;
    const FractionalResult res = run_algorithm1(m, c);
    const double tol = 10.0 * std::max({c.tol_ce, c.tol_ice, c.tol_eae});
    const KktCertificate cert = verify_fractional_ce(m, res, c.outside_price, tol);
    pass += cert.passed();
    worst = std::max(worst, cert.max_residual());
    if (!cert.passed()) failures += fmt(" %d(%s)", trial, cert.first_failure().c_str());
  }
  const double sec = seconds_since(t0);
  return {pass == 50 && sec < 300.0,
          fmt("%d/50 certified at tol 1e-2, worst residual %.2e, %.1fs%s", pass,
              worst, sec, failures.c_str())};
}

// Objective of the per-edge service-provider problem.
double edge_objective(std::span<const double> x, std::span<const double> y,
                      double z, double p, double l, double beta) {
  double f = p * z, sum = z - l;
  for (std::size_t u = 0; u < x.size(); ++u) {
    f += 0.5 * beta * (y[u] - x[u]) * (y[u] - x[u]);
    sum += y[u];
  }
  return f + 0.5 * beta * sum * sum;
}

Verdict criterion3() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_obj = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + trial % 8;
    std::vector<double> x(m);
    for (double& v : x) v = 1.5 * u(rng);
    const double p = trial % 4 == 0 ? 0.0 : 200.0 * u(rng) - 50.0;
    const double l = std::floor(5.0 * u(rng));
    const double beta = 1.0 + 99.0 * u(rng);
    const EdgeExpectation mine = sp_update_y_z(x, p, l, beta);
    const oracle::DenseEdgeSolution ref = oracle::dense_edge_oracle(x, p, l, beta);
    worst = std::max(worst, std::abs(mine.z - ref.z));
    std::vector<double> ry(ref.y.data(), ref.y.data() + m);
    for (int k = 0; k < m; ++k) worst = std::max(worst, std::abs(mine.y[k] - ry[k]));
    const double f_mine = edge_objective(x, mine.y, mine.z, p, l, beta);
    const double f_ref = edge_objective(x, ry, ref.z, p, l, beta);
    worst_obj = std::max(worst_obj, (f_mine - f_ref) / std::max(1.0, std::abs(f_ref)));
  }
  return {worst <= 1e-6 && worst_obj <= 1e-9,
          fmt("1000 edges, max |closed form - QP| %.2e, objective excess %.2e",
              worst, worst_obj)};
}

Verdict criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(44);
  const auto g = TimeExtendedGraph::build(testing::line_graph(4, 1.0), 20, 15.0);
  int pass = 0;
  double worst_gap = -1e300, worst_grad = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracle::random_x_update(g, rng, 1 + trial % 3);
    const SubproblemResult r = solve_x_update(inst.agent, inst.input());
    const double mine = oracle::edge_objective(inst.agent, inst.input(), r.demand);
    const double grid = oracle::grid_maximum(inst.agent, inst.input(), 11);
    const double grad = oracle::gradient_mismatch(inst.agent, inst.input(), r.demand);
    worst_gap = std::max(worst_gap, grid - mine);
    worst_grad = std::max(worst_grad, grad);
    pass += mine >= grid - 1e-3 && grad <= 1e-5;
  }
  const double sec = seconds_since(t0);
  return {pass == 100 && sec < 300.0,
          fmt("%d/100, worst grid excess %.2e, worst gradient mismatch %.2e, %.1fs",
              pass, worst_gap, worst_grad, sec)};
}

struct SeedRuns {
  std::uint64_t seed;
  CampaignResult fisher50, budget50, profit50, fisher60;
  double fisher_seconds = 0.0;
};

std::vector<SeedRuns> baseline_runs() {
  std::vector<SeedRuns> out;
  for (std::uint64_t seed : {1, 2, 3}) {
    const Scenario s = delivery_stream(seed);
    SeedRuns r{seed, {}, {}, {}, {}};
    const auto t0 = std::chrono::steady_clock::now();
    r.fisher50 = campaign(s, Mechanism::kFisher, 0.5, 13, seed);
    r.fisher_seconds = seconds_since(t0);
    r.budget50 = campaign(s, Mechanism::kClockBudget, 0.5, 13, seed);
    r.profit50 = campaign(s, Mechanism::kClockProfit, 0.5, 13, seed);
    r.fisher60 = campaign(s, Mechanism::kFisher, 0.6, 13, seed);
    out.push_back(std::move(r));
  }
  return out;
}

Verdict criterion5(const SeedRuns& r) {
  double worst = 0.0;
  for (const AuctionReport& a : r.fisher50.auctions) worst = std::max(worst, a.mce);
  const bool ok = worst <= 0.01 && r.fisher50.metrics.failures == 0;
  return {ok && r.fisher_seconds < 900.0,
          fmt("seed %llu, 177 flights, 13 auctions at 50%%: max MCE %.3f%%, %d failures, %.1fs",
              static_cast<unsigned long long>(r.seed), 100.0 * worst,
              r.fisher50.metrics.failures, r.fisher_seconds)};
}

Verdict criterion6(const std::vector<SeedRuns>& runs) {
  int votes = 0;
  std::string detail;
  for (const SeedRuns& r : runs) {
    const int f = r.fisher50.metrics.never_allocated;
    const int b = r.budget50.metrics.never_allocated;
    const int p = r.profit50.metrics.never_allocated;
    const int f60 = r.fisher60.metrics.never_allocated;
    const bool ok = f60 == 0 && f <= b && b <= p;
    votes += ok;
    detail += fmt(" seed %llu: 60%% fisher %d, 50%% %d<=%d<=%d %s;",
                  static_cast<unsigned long long>(r.seed), f60, f, b, p,
                  ok ? "ok" : "no");
  }
  return {2 * votes > static_cast<int>(runs.size()),
          fmt("%d/%zu seeds agree:", votes, runs.size()) + detail};
}

Verdict criterion8() {
  const Scenario s = delivery_stream(2, 60);
  std::string detail;
  bool ok = true;
  for (Mechanism m : {Mechanism::kFisher, Mechanism::kClockBudget, Mechanism::kClockProfit}) {
    CampaignConfig c = campaign_config(s);
    c.mechanism = m;
    c.capacity_fraction = 0.5;
    c.auctions = 13;
    c.seed = 2;
    const CampaignResult a = run_campaign(s, c);
    const CampaignResult b = run_campaign(s, c);
    c.solver.policy = ExecutionPolicy::kSerial;
    const CampaignResult serial = run_campaign(s, c);
    g_safety.check(s, c, a);
    const std::string ja = campaign_summary_json(s, c, a);
    const std::string jb = campaign_summary_json(s, c, b);
    const std::string js = campaign_summary_json(s, c, serial);
    const bool same = ja == jb && ja == js;
    ok = ok && same;
    detail += fmt(" %s %s;", to_string(m), same ? "identical" : "DIFFERS");
  }
  return {ok, "parallel x2 and serial summaries:" + detail};
}

Verdict criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = vertiport_fixture();
  const CampaignConfig c = campaign_config(s);
  const CampaignResult r = run_campaign(s, c);
  g_safety.check(s, c, r);
  const std::set<std::string> targets{"AC003", "AC009", "AC011", "AC015"};
  int hits = 0;
  std::string delayed, dropped;
  for (const AgentRecord& a : r.agents) {
    const bool is_delayed = a.state == AgentState::kAllocated && a.delay > 0;
    if (is_delayed) delayed += " " + a.id;
    if (a.state == AgentState::kNeverAllocated) dropped += " " + a.id;
    if (is_delayed && targets.count(a.id)) ++hits;
  }
  return {hits >= 3, fmt("%d/4 targets delayed; delayed:%s; dropped:%s; converged %s, %.1fs",
                         hits, delayed.c_str(), dropped.empty() ? " none" : dropped.c_str(),
                         r.metrics.all_converged ? "yes" : "no", seconds_since(t0))};
}

Verdict criterion10(const UncontestedSweep& sw) {
  const auto [lo, hi] = std::minmax_element(sw.iterations.begin(), sw.iterations.end());
  const bool flat = *hi <= 1.5 * *lo;
  const Scenario s = delivery_stream(1);
  std::vector<double> mean;
  std::string trend;
  for (int I = 1; I <= 13; ++I) {
    const CampaignResult r = campaign(s, Mechanism::kFisher, 0.5, I, 1);
    mean.push_back(r.metrics.mean_iterations);
    trend += fmt("%s%.0f", I > 1 ? "," : "", r.metrics.mean_iterations);
  }
  int inversions = 0;
  for (std::size_t k = 1; k < mean.size(); ++k) inversions += mean[k] > mean[k - 1];
  const bool monotone = inversions <= 1;
  return {flat && monotone,
          fmt("100%% capacity iterations %d..%d over n=10..100 (%s, limit ratio 1.5); "
              "mean iterations for I=1..13 [%s], %d inversions (%s, limit 1)",
              *lo, *hi, flat ? "flat" : "not flat", trend.c_str(), inversions,
              monotone ? "ok" : "too many")};
}

void print(int k, const char* title, const Verdict& v, int& failed) {
  std::printf("C%-2d %s  %s: %s\n", k, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
  std::fflush(stdout);
  failed += !v.pass;
}

}  // namespace
}  // namespace airmarket

int main() {
  using namespace airmarket;
  int failed = 0;
  const UncontestedSweep sweep = sweep_uncontested();
  print(1, "uncontested convergence", criterion1(sweep), failed);
  print(2, "fractional equilibrium certificate", criterion2(), failed);
  print(3, "closed-form provider update", criterion3(), failed);
  print(4, "agent subproblem solver", criterion4(), failed);
  const std::vector<SeedRuns> runs = baseline_runs();
  print(5, "market clearing error after rounding", criterion5(runs.front()), failed);
  print(6, "baseline ordering", criterion6(runs), failed);
  const Verdict c8 = criterion8();
  const Verdict c9 = criterion9();
  const Verdict c10 = criterion10(sweep);
  std::string notes;
  for (const std::string& n : g_safety.notes) notes += " [" + n + "]";
  print(7, "hard safety",
        {g_safety.violations == 0,
         fmt("%d campaigns, %ld accepted routes, %ld violations", g_safety.campaigns,
             g_safety.bundles, g_safety.violations) + notes},
        failed);
  print(8, "determinism", c8, failed);
  print(9, "vertiport fixture", c9, failed);
  print(10, "sensitivity shape", c10, failed);
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
