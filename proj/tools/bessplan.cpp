// bessplan: synthesize scenarios, plan bids, export models.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/errors.hpp"
#include "bess/formulation.hpp"
#include "bess/market_model.hpp"
#include "bess/report.hpp"
#include "bess/scenario.hpp"
#include "bess/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kData = 3, kLimit = 4, kConsistency = 5 };

// Largest instance the built-in branch-and-bound is offered.
constexpr int kGuardrailBinaries = 5000;
constexpr std::size_t kGuardrailVariables = 50000;

class UsageError : public bess::Error {
 public:
  using bess::Error::Error;
};

struct RunOptions {
  std::string config_path;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> days;
  std::optional<std::string> markets;
  std::optional<double> cdeg;
  std::optional<int> step;
  std::optional<int> hours;
  std::optional<double> time_limit;
  std::string out;
  bool export_only = false;
  std::string format = "mps";
};

// Everything a run needs after flags and config file are merged.
struct RunConfig {
  fs::path data_dir;  // empty: synthesize
  std::uint64_t seed = 1;
  int days = 2;
  bess::MarketSet markets = bess::MarketSet::all();
  bess::BessConfig bess;
  int hours = bess::kHoursPerDay;
  bess::SolverOptions solver;
  fs::path out = "out";
};

RunConfig resolve(const RunOptions& o) {
  RunConfig rc;
  rc.bess.step_minutes = 60;
  rc.solver.time_limit_seconds = 120.0;
  if (!o.config_path.empty()) {
    const fs::path path = o.config_path;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw bess::ValidationError(path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();
    if (j.contains("data_dir")) rc.data_dir = base / j["data_dir"].get<std::string>();
    if (j.contains("synth")) {
      rc.seed = j["synth"].value("seed", rc.seed);
      rc.days = j["synth"].value("days", rc.days);
    }
    if (j.contains("markets")) rc.markets = bess::MarketSet::parse(j["markets"].get<std::string>());
    if (j.contains("bess")) rc.bess = bess::config_from_json(j["bess"], rc.bess);
    rc.hours = j.value("hours", rc.hours);
    if (j.contains("solver")) {
      const json& s = j["solver"];
      rc.solver.time_limit_seconds = s.value("time_limit", rc.solver.time_limit_seconds);
      rc.solver.node_limit = s.value("node_limit", rc.solver.node_limit);
      rc.solver.abs_gap = s.value("abs_gap", rc.solver.abs_gap);
    }
    if (j.contains("out")) rc.out = base / j["out"].get<std::string>();
  }
  if (!o.data_dir.empty()) rc.data_dir = o.data_dir;
  if (o.seed) rc.seed = *o.seed;
  if (o.days) rc.days = *o.days;
  if (o.markets) {
    try {
      rc.markets = bess::MarketSet::parse(*o.markets);
    } catch (const bess::Error& e) {
      throw UsageError(std::string("--markets: ") + e.what());
    }
  }
  if (o.cdeg) rc.bess.c_deg = *o.cdeg;
  if (o.step) rc.bess.step_minutes = *o.step;
  if (o.hours) rc.hours = *o.hours;
  if (o.time_limit) rc.solver.time_limit_seconds = *o.time_limit;
  if (!o.out.empty()) rc.out = o.out;

  if (rc.days < 1) throw UsageError("--days must be at least 1");
  if (rc.hours < 1 || rc.hours > bess::kHoursPerDay) throw UsageError("--hours must be in 1..24");
  if (!rc.data_dir.empty() && !fs::is_directory(rc.data_dir)) {
    throw UsageError("data directory not found: " + rc.data_dir.string());
  }
  rc.bess.validate();
  rc.solver.validate();
  return rc;
}

bess::ScenarioSet scenarios_for(const RunConfig& rc) {
  bess::ScenarioSet set = [&] {
    if (rc.data_dir.empty()) {
      bess::SynthesisParams p;
      p.step_minutes = rc.bess.step_minutes;
      return bess::synthesize_scenarios(rc.seed, rc.days, p);
    }
    const fs::path prob = rc.data_dir / "probabilities.csv";
    return bess::load_scenarios(rc.data_dir / "frequency.csv", rc.data_dir / "prices.csv",
                                fs::exists(prob) ? std::optional<fs::path>(prob) : std::nullopt);
  }();
  if (set.step_minutes() != rc.bess.step_minutes) set = set.coarsened(rc.bess.step_minutes);
  return set.with_horizon(rc.hours);
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw bess::IoError("write failed: " + path.string());
}

void print_census(const bess::MilpModel& model) {
  const bess::Census c = bess::census(model);
  std::printf("model: %d variables (%d binary), %d constraints, %d nonzeros\n", c.total_variables, c.binaries,
              c.total_constraints, c.nonzeros);
}

struct Pipeline {
  bess::ScenarioSet scenarios;
  bess::EnergyRequirement req;
  bess::DegradationSchedule deg;
  bess::MilpModel model;

  explicit Pipeline(const RunConfig& rc)
      : scenarios(scenarios_for(rc)),
        req(bess::build_requirements(scenarios, rc.bess)),
        deg(bess::degradation_costs(req, rc.bess)),
        model(bess::build_model(scenarios, req, deg, rc.bess, formulation(rc))) {}

  static bess::FormulationOptions formulation(const RunConfig& rc) {
    bess::FormulationOptions f;
    f.markets = rc.markets;
    return f;
  }
};

bess::ExportFormat parse_format(const std::string& f) {
  return f == "lp" ? bess::ExportFormat::Lp : bess::ExportFormat::Mps;
}

int cmd_synth(std::uint64_t seed, int days, int step, const std::string& out) {
  if (days < 1) throw UsageError("--days must be at least 1");
  bess::SynthesisParams p;
  p.step_minutes = step;
  const bess::ScenarioSet set = bess::synthesize_scenarios(seed, days, p);
  const fs::path dir = out;
  fs::create_directories(dir);
  bess::save_scenarios(set, dir / "frequency.csv", dir / "prices.csv", dir / "probabilities.csv");
  std::printf("wrote %zu scenarios to %s\n", set.size(), dir.string().c_str());
  return kOk;
}

int cmd_export(const RunOptions& o) {
  RunConfig rc = resolve(o);
  Pipeline p(rc);
  print_census(p.model);
  fs::path path = rc.out;
  if (fs::is_directory(path)) path /= "model." + o.format;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  bess::export_model(p.model, parse_format(o.format), path);
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

int cmd_plan(const RunOptions& o) {
  RunConfig rc = resolve(o);
  Pipeline p(rc);
  fs::create_directories(rc.out);
  print_census(p.model);
  write_json(bess::model_summary(p.model), rc.out / "model_summary.json");

  const int binaries = bess::census(p.model).binaries;
  if (o.export_only) {
    const fs::path path = rc.out / ("model." + o.format);
    bess::export_model(p.model, parse_format(o.format), path);
    std::printf("wrote %s\n", path.string().c_str());
    return kOk;
  }
  const std::size_t variables = p.model.variables().size();
  if (binaries > kGuardrailBinaries || variables > kGuardrailVariables) {
    std::fprintf(stderr,
                 "error: %d binaries / %zu variables exceed the built-in solver's limits of %d / %zu.\n"
                 "Rerun with --export-only (or use `bessplan export`) and solve the MPS file with an external "
                 "MILP solver, or reduce --days/--hours or raise --step.\n",
                 binaries, variables, kGuardrailBinaries, kGuardrailVariables);
    return kLimit;
  }

  rc.solver.on_incumbent = [](double obj, double bound, long nodes) {
    std::fprintf(stderr, "  incumbent %.6f  bound %.6f  nodes %ld\n", obj, bound, nodes);
  };
  const bess::Solution sol = bess::solve_bb(p.model, rc.solver);
  if (sol.status == bess::SolveStatus::Infeasible) {
    // idling is always feasible, so this is a modelling or solver fault
    const fs::path dump = rc.out / "infeasible_model.lp";
    bess::export_model(p.model, bess::ExportFormat::Lp, dump);
    std::fprintf(stderr, "error: model reported infeasible; model written to %s\n", dump.string().c_str());
    return kConsistency;
  }
  const auto violations = bess::validate(sol, p.model);
  if (!violations.empty()) {
    for (const auto& v : violations) std::fprintf(stderr, "violation %s (%s): %g\n", v.what.c_str(), v.family.c_str(), v.amount);
    return kConsistency;
  }
  write_json(bess::solution_json(sol, p.model), rc.out / "solution.json");
  const bess::SettlementReport report = bess::settle(sol, p.model, p.scenarios, p.req, rc.bess);
  bess::emit(report, rc.out);

  std::printf("status %s  objective %.6f  gap %.6f  nodes %ld  %.2fs\n", std::string(bess::to_string(sol.status)).c_str(),
              sol.objective, sol.gap, sol.node_count, sol.wall_time);
  std::printf("expected total %.6f EUR\n", report.expected_total());
  std::printf("report written to %s\n", rc.out.string().c_str());
  if (sol.status != bess::SolveStatus::Optimal) {
    std::fprintf(stderr, "warning: solver limit reached; the report describes the best plan found\n");
    return kLimit;
  }
  return kOk;
}

void add_run_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--data", o.data_dir, "directory with frequency.csv, prices.csv[, probabilities.csv]");
  cmd->add_option("--seed", o.seed, "synthesis seed when no data is given");
  cmd->add_option("--days", o.days, "synthesized days (scenarios)");
  cmd->add_option("--markets", o.markets, "enabled markets, e.g. N,D,SDCH,SCH or idle");
  cmd->add_option("--cdeg", o.cdeg, "degradation cost, EUR/MWh")->check(CLI::NonNegativeNumber);
  cmd->add_option("--step", o.step, "dispatch step, minutes")->check(CLI::IsMember({1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60}));
  cmd->add_option("--hours", o.hours, "planning horizon, hours");
  cmd->add_option("--time-limit", o.time_limit, "solver time limit, seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory (file for export)");
  cmd->add_option("--format", o.format, "export format")->check(CLI::IsMember({"mps", "lp"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic bidding planner for a battery in FCR and spot markets"};
  app.require_subcommand(1);

  std::uint64_t synth_seed = 1;
  int synth_days = 7, synth_step = 1;
  std::string synth_out = "data";
  auto* synth = app.add_subcommand("synth", "write a synthetic scenario set");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--days", synth_days);
  synth->add_option("--step", synth_step)->check(CLI::IsMember({1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60}));
  synth->add_option("--out", synth_out);

  RunOptions plan_opts;
  auto* plan = app.add_subcommand("plan", "build, solve and report");
  add_run_flags(plan, plan_opts);
  plan->add_flag("--export-only", plan_opts.export_only, "write the model instead of solving it");

  RunOptions export_opts;
  export_opts.out = "model.mps";
  auto* exp = app.add_subcommand("export", "write the model as MPS or LP");
  add_run_flags(exp, export_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_seed, synth_days, synth_step, synth_out);
    if (*plan) return cmd_plan(plan_opts);
    return cmd_export(export_opts);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const bess::ConsistencyError& e) {
    std::fprintf(stderr, "consistency failure: %s\n", e.what());
    return kConsistency;
  } catch (const bess::Error& e) {
    // parse, validation, range and build errors all trace back to the inputs
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConsistency;
  }
}
