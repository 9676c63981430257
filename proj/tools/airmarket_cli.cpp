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

// Command-line entry point: generate, run, verify and report.
// Exit codes: 0 success, 1 input error, 2 non-convergence, 3 failed check.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "airmarket/horizon.hpp"
#include "airmarket/report.hpp"
#include "airmarket/scenario.hpp"

namespace fs = std::filesystem;
using namespace airmarket;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;
constexpr int kCheckFailed = 3;

std::string default_out_dir() {
  const char* env = std::getenv("AIRMARKET_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "out";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ModelError("cannot write " + path.string());
}

struct GenerateArgs {
  GeneratorParams params;
  std::string rounding = "half-up";
  bool fixture = false;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  Scenario s;
  if (a.fixture) {
    s = vertiport_fixture();
  } else {
    GeneratorParams p = a.params;
    p.rounding = parse_rounding(a.rounding);
    s = generate_scenario(p);
  }
  const fs::path out = a.out.empty() ? fs::path(default_out_dir()) / "scenario.json"
                                     : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_scenario(s, out.string());
  std::cout << "wrote " << out.string() << " (" << s.requests.size()
            << " requests, " << s.regions.size() << " regions)\n";
  return kOk;
}

struct RunArgs {
  std::string scenario;
  std::string mechanism = "fisher";
  std::optional<double> capacity_fraction;
  std::optional<std::string> rounding;
  std::optional<int> auctions;
  std::optional<double> beta;
  std::optional<int> inner_iters;
  std::optional<int> max_outer;
  std::optional<double> tol_ce, tol_ice, tol_eae, tol_fixed_point;
  std::optional<std::uint64_t> seed;
  bool serial = false;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  CampaignConfig c = campaign_config(s);
  c.mechanism = parse_mechanism(a.mechanism);
  if (a.capacity_fraction) c.capacity_fraction = *a.capacity_fraction;
  if (a.rounding) c.rounding = parse_rounding(*a.rounding);
  if (a.auctions) c.auctions = *a.auctions;
  if (a.beta) c.solver.beta = *a.beta;
  if (a.inner_iters) c.solver.inner_iterations = *a.inner_iters;
  if (a.max_outer) c.solver.max_outer = *a.max_outer;
  if (a.tol_ce) c.solver.tol_ce = *a.tol_ce;
  if (a.tol_ice) c.solver.tol_ice = *a.tol_ice;
  if (a.tol_eae) c.solver.tol_eae = *a.tol_eae;
  if (a.tol_fixed_point) c.solver.tol_fixed_point = *a.tol_fixed_point;
  if (a.seed) c.seed = *a.seed;
  if (a.serial) c.solver.policy = ExecutionPolicy::kSerial;
  c.keep_snapshots = c.mechanism == Mechanism::kFisher;

  const CampaignResult r = run_campaign(s, c);

  const fs::path dir = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  write_file(dir / "scenario.json", scenario_to_json(s));
  write_file(dir / "summary.json", campaign_summary_json(s, c, r));
  std::ostringstream auctions, traces, allocations;
  write_auctions_csv(auctions, r);
  write_traces_csv(traces, r);
  write_allocations_csv(allocations, r);
  write_file(dir / "auctions.csv", auctions.str());
  write_file(dir / "traces.csv", traces.str());
  write_file(dir / "allocations.csv", allocations.str());
  if (c.keep_snapshots) write_file(dir / "fractional.json", snapshots_json(s, c, r));

  const CampaignMetrics& m = r.metrics;
  std::cout << to_string(c.mechanism) << " capacity " << c.capacity_fraction
            << ", " << c.auctions << " auctions: " << m.allocated << "/"
            << m.agents << " allocated, " << m.num_delayed << " delayed, "
            << m.never_allocated << " never allocated, max MCE " << m.max_mce
            << ", safety violations " << m.safety_violations << "\n";
  std::cout << "artifacts in " << dir.string() << "\n";
  if (m.failures > 0 || !m.all_converged) {
    std::cerr << "warning: " << m.failures << " auction failures, converged="
              << (m.all_converged ? "yes" : "no") << "\n";
    return kNotConverged;
  }
  return kOk;
}

struct VerifyArgs {
  std::string run;
  double tol = 0.0;
};

int cmd_verify(const VerifyArgs& a) {
  const fs::path dir(a.run);
  const Scenario s = load_scenario((dir / "scenario.json").string());
  const fs::path snap = dir / "fractional.json";
  if (!fs::exists(snap)) {
    std::cout << "no fractional snapshots in " << dir.string()
              << " (clock mechanisms have none)\n";
    return kOk;
  }
  const std::vector<SnapshotCheck> checks =
      verify_snapshots(s, read_file(snap), a.tol);
  int failed = 0;
  for (const SnapshotCheck& c : checks) {
    const KktCertificate& k = c.certificate;
    const std::string f = k.first_failure();
    std::cout << "auction " << c.index << " agents " << c.agents << " tol "
              << k.tol << "/" << k.credit_tol << " a=" << k.capacity_residual
              << " b=" << k.complementarity_residual
              << " c=" << k.optimality_residual << " d=" << k.budget_residual
              << (f.empty() ? " ok" : " FAILED check (" + f + ")") << "\n";
    failed += !f.empty();
  }
  std::cout << checks.size() - failed << "/" << checks.size()
            << " auctions certified\n";
  return failed > 0 ? kCheckFailed : kOk;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  std::vector<ComparisonRow> rows;
  std::ostringstream traces;
  traces << "scenario,seed,mechanism,capacity_fraction,auction,iteration,"
            "outer,inner,ce,ice,eae,max_price,omega_max,fixed_point\n";
  for (const std::string& run : a.runs) {
    const fs::path dir(run);
    rows.push_back(comparison_row(read_file(dir / "summary.json")));
    const ComparisonRow& id = rows.back();
    std::ostringstream prefix;
    prefix << csv_field(id.scenario) << ',' << id.seed << ',' << id.mechanism
           << ',' << id.capacity_fraction << ',';
    std::istringstream lines(read_file(dir / "traces.csv"));
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
      if (!line.empty()) traces << prefix.str() << line << '\n';
    }
  }
  const fs::path dir = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  std::ostringstream table;
  write_comparison_csv(table, rows);
  write_file(dir / "comparison.csv", table.str());
  write_file(dir / "traces.csv", traces.str());
  std::cout << table.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Market-based airspace allocation campaigns"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "Write a synthetic scenario file");
  g->add_option("--flights", gen.params.flights, "Number of flights");
  g->add_option("--seed", gen.params.seed, "Generator seed");
  g->add_option("--horizon", gen.params.horizon, "Time steps");
  g->add_option("--auctions", gen.params.auctions, "Default auction count");
  g->add_option("--capacity-fraction", gen.params.capacity_fraction,
                "Default capacity fraction");
  g->add_option("--rounding", gen.rounding, "half-up, floor or ceil");
  g->add_option("--cols", gen.params.grid_cols, "Sector grid columns");
  g->add_option("--rows", gen.params.grid_rows, "Sector grid rows");
  g->add_option("--vertiports", gen.params.vertiports, "Vertiport count");
  g->add_flag("--fixture", gen.fixture, "Write the 20-taxi vertiport fixture");
  g->add_option("--out", gen.out, "Output file (default $AIRMARKET_OUT_DIR/scenario.json)");

  RunArgs run;
  CLI::App* r = app.add_subcommand("run", "Run a campaign and write artifacts");
  r->add_option("--scenario", run.scenario, "Scenario file")->required();
  r->add_option("--mechanism", run.mechanism, "fisher, clock-budget or clock-profit");
  r->add_option("--capacity-fraction", run.capacity_fraction, "Capacity fraction");
  r->add_option("--rounding", run.rounding, "half-up, floor or ceil");
  r->add_option("--auctions", run.auctions, "Auction count I");
  r->add_option("--beta", run.beta, "ADMM penalty and clock increment");
  r->add_option("--inner-iters", run.inner_iters, "Inner iterations N");
  r->add_option("--max-outer", run.max_outer, "Outer iteration limit K");
  r->add_option("--tol-ce", run.tol_ce, "Complementarity tolerance (<=0: relative default)");
  r->add_option("--tol-ice", run.tol_ice, "Selection tolerance");
  r->add_option("--tol-eae", run.tol_eae, "Expected-allocation tolerance");
  r->add_option("--tol-fixed-point", run.tol_fixed_point,
                "Budget fixed-point tolerance (0: off)");
  r->add_option("--seed", run.seed, "Campaign seed (credit grants)");
  r->add_flag("--serial", run.serial, "Run the serial kernels");
  r->add_option("--out", run.out, "Output directory (default $AIRMARKET_OUT_DIR or out)");

  VerifyArgs ver;
  CLI::App* v = app.add_subcommand("verify", "Re-certify the saved fractional equilibria");
  v->add_option("--run", ver.run, "Directory written by run")->required();
  v->add_option("--tol", ver.tol, "Override the stored tolerance");

  ReportArgs rep;
  CLI::App* p = app.add_subcommand("report", "Write the comparison and trace CSVs");
  p->add_option("--run", rep.runs, "Run directories")->required();
  p->add_option("--out", rep.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  try {
    if (g->parsed()) return cmd_generate(gen);
    if (r->parsed()) return cmd_run(run);
    if (v->parsed()) return cmd_verify(ver);
    return cmd_report(rep);
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
