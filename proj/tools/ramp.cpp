// ramp: plan, run, replay and report command-line front end.
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ramp/bench/harness.hpp"
#include "ramp/core/validate.hpp"
#include "ramp/io/goal_io.hpp"
#include "ramp/planner/refine.hpp"
#include "ramp/sim/config.hpp"
#include "ramp/sim/trace.hpp"

#ifndef RAMP_DEFAULT_DOMAINS_DIR
#define RAMP_DEFAULT_DOMAINS_DIR "domains"
#endif

namespace fs = std::filesystem;
using namespace ramp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

GoalConfiguration load_goal_file(const fs::path& path, const std::string& catalog_dir) {
  GoalConfiguration goal = io::parse_goal(io::read_file(path));
  std::vector<BeamSpec> beams = goal.beams;
  if (!catalog_dir.empty()) beams = io::load_catalog(catalog_dir).beams;
  ValidationReport r = validate_goal(goal, beams);
  if (!r.ok()) throw Error(ErrorCode::SemanticError, path.string() + ": " + r.summary());
  return goal;
}

int cmd_plan(const std::string& goal_file, const std::string& domains_dir, const std::string& out,
             const std::string& catalog_dir, int horizon) {
  GoalConfiguration goal = load_goal_file(goal_file, catalog_dir);
  planner::PlanOptions options;
  options.coarse_horizon = horizon;
  planner::PlanResult r = planner::plan(goal, planner::Domains::load(domains_dir), options);
  io::write_file(out, planner::plan_to_json(r).dump(2) + "\n");
  std::cout << goal.id << ": " << r.coarse_plan.horizon() << " coarse steps, " << r.stats.fine_length
            << " fine actions, " << r.fine.count("fasten") << " fasten\n";
  return 0;
}

int cmd_run(const std::string& cls_text, const std::string& catalog_dir, const std::string& config_file,
            std::optional<std::uint64_t> seed, const std::string& out, bool parallel, double grid_dt,
            const std::string& domains_dir) {
  auto cls = goal_class_from_string(cls_text);
  if (!cls) throw Error(ErrorCode::SchemaError, "unknown class '" + cls_text + "'");
  if (catalog_dir.empty()) throw Error(ErrorCode::ConfigError, "no catalog: pass --catalog or set RAMP_CATALOG");
  io::AssemblyCatalog catalog = io::load_catalog(catalog_dir);
  sim::SimConfig config = sim::parse_config(io::read_file(config_file));
  if (seed) config.seed = *seed;
  bench::ProtocolOptions options;
  options.grid_dt = grid_dt;
  options.parallel_goals = parallel;
  bench::BenchmarkReport report =
      bench::run_protocol(*cls, catalog, planner::Domains::load(domains_dir), config, options);
  bench::emit_report(report, out, catalog);
  std::cout << bench::summary_csv(report);
  return 0;
}

int cmd_replay(const std::string& trace_file, const std::string& goal_file, const std::string& catalog_dir) {
  GoalConfiguration goal = load_goal_file(goal_file, catalog_dir);
  io::LayoutTemplate layout = catalog_dir.empty() ? sim::replay_layout() : io::load_catalog(catalog_dir).layout;
  sim::ExecutionTrace trace = sim::parse_trace(io::read_file(trace_file), goal, layout);
  std::cout << "time_s,completion_pct\n";
  for (const auto& p : sim::replay(trace, goal))
    std::cout << bench::format_number(p.t_s) << "," << bench::format_number(p.completion_pct) << "\n";
  std::cout << "# run ended at " << bench::format_number(trace.end_time_s()) << " s\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  bench::Verification v = bench::verify_report(dir);
  for (const auto& p : v.problems) std::cerr << "mismatch: " << p << "\n";
  std::cout << "mean_success_pct," << bench::format_number(v.recomputed.mean_success_pct) << "\n"
            << "mean_time_s," << bench::format_number(v.recomputed.mean_time_s) << "\n"
            << (v.ok ? "report verified\n" : "report does NOT match its traces\n");
  return v.ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAMP benchmark tools"};
  app.require_subcommand(1);

  const std::string default_catalog = env_or("RAMP_CATALOG", "");
  const std::string default_domains = env_or("RAMP_DOMAINS", RAMP_DEFAULT_DOMAINS_DIR);

  std::string goal_file, domains_dir = default_domains, out, catalog_dir = default_catalog, config_file,
                         cls, trace_file, in_dir;
  int horizon = planner::kDefaultCoarseHorizon;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
  double grid_dt = bench::kDefaultGridDt;

  auto* plan = app.add_subcommand("plan", "plan one goal and write the plan as JSON");
  plan->add_option("--goal", goal_file, "goal XML file")->required();
  plan->add_option("--domains", domains_dir, "directory with coarse.ald and fine.ald");
  plan->add_option("--out", out, "plan JSON output")->required();
  plan->add_option("--catalog", catalog_dir, "catalog to validate the goal against");
  plan->add_option("--horizon", horizon, "coarse horizon bound");

  auto* run = app.add_subcommand("run", "run the five-repeat protocol over one class");
  run->add_option("--class", cls, "easy, medium or hard")->required();
  run->add_option("--catalog", catalog_dir, "catalog directory (default $RAMP_CATALOG)");
  run->add_option("--config", config_file, "simulator config TOML")->required();
  run->add_option("--seed", seed, "class seed, overrides the config");
  run->add_option("--out", out, "output directory")->required();
  run->add_flag("--parallel-goals", parallel, "run the class's goals concurrently");
  run->add_option("--grid-dt", grid_dt, "curve sampling step in seconds");
  run->add_option("--domains", domains_dir, "directory with coarse.ald and fine.ald");

  auto* replay = app.add_subcommand("replay", "print the completion curve of a trace");
  replay->add_option("--trace", trace_file, "trace JSONL file")->required();
  replay->add_option("--goal", goal_file, "goal XML file")->required();
  replay->add_option("--catalog", catalog_dir, "catalog for the peg layout");

  auto* report = app.add_subcommand("report", "re-derive and check a run directory's report");
  report->add_option("--in", in_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*plan) return cmd_plan(goal_file, domains_dir, out, catalog_dir, horizon);
    if (*run) return cmd_run(cls, catalog_dir, config_file, seed, out, parallel, grid_dt, domains_dir);
    if (*replay) return cmd_replay(trace_file, goal_file, catalog_dir);
    if (*report) return cmd_report(in_dir);
  } catch (const Error& e) {
    std::cerr << "ramp: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "ramp: internal error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
