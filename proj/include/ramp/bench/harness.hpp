#pragma once

// Evaluation protocol: plan, execute and score every goal of a class five
// times, then aggregate into curves and a summary.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ramp/core/types.hpp"
#include "ramp/error.hpp"
#include "ramp/io/goal_io.hpp"
#include "ramp/planner/refine.hpp"
#include "ramp/sim/config.hpp"
#include "ramp/sim/execute.hpp"
#include "ramp/sim/trace.hpp"

namespace ramp::bench {

inline constexpr int kRepeats = 5;
inline constexpr double kDefaultGridDt = 1.0;

struct TrialResult {
  std::string goal_id;
  int repeat_index = 1;  // 1..5
  std::uint64_t seed = 0;
  sim::ExecutionTrace trace;
  std::vector<sim::TimelinePoint> curve;
  double final_completion_pct = 0.0;
  double total_time_s = 0.0;
};

struct CurveStats {
  double dt = kDefaultGridDt;
  std::vector<double> time_s;
  std::vector<double> mean_pct;
  std::vector<double> std_pct;
  std::vector<double> best_pct;
};

struct GoalReport {
  std::string goal_id;
  std::size_t required_pegs = 0;
  bool planned = true;
  std::string plan_error;  // set when planning failed
  std::vector<TrialResult> trials;
  CurveStats curves;
  int best_trial = 1;  // repeat index
  double mean_success_pct = 0.0;
  double mean_time_s = 0.0;
};

struct Summary {
  double mean_success_pct = 0.0;
  double mean_time_s = 0.0;
};

struct BenchmarkReport {
  GoalClass goal_class = GoalClass::Easy;
  std::uint64_t seed = 0;
  std::string config_hash;
  double grid_dt = kDefaultGridDt;
  std::vector<GoalReport> per_goal;
  Summary summary;
};

/// Seed of one trial: the class seed plus the trial's ordinal in the class
/// run (goal position * 5 + repeat - 1).
inline std::uint64_t trial_seed(std::uint64_t class_seed, std::size_t goal_index, int repeat_index) {
  return class_seed + static_cast<std::uint64_t>(goal_index) * kRepeats + static_cast<std::uint64_t>(repeat_index - 1);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

/// Index of the best trial: highest final completion, then shortest time,
/// then earliest repeat.
inline std::size_t best_trial_index(const std::vector<TrialResult>& trials) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const auto& a = trials[i];
    const auto& b = trials[best];
    if (a.final_completion_pct > b.final_completion_pct ||
        (a.final_completion_pct == b.final_completion_pct && a.total_time_s < b.total_time_s))
      best = i;
  }
  return best;
}

/// Samples the trials' step functions on t = k * dt, k = 0..ceil(max_time/dt).
inline CurveStats curve_stats(const std::vector<TrialResult>& trials, double grid_dt_s) {
  if (!(grid_dt_s > 0) || !std::isfinite(grid_dt_s))
    throw Error(ErrorCode::GridError, "grid spacing must be positive");
  if (trials.size() != static_cast<std::size_t>(kRepeats))
    throw Error(ErrorCode::ProtocolError, "curve statistics need exactly 5 trials");
  double max_time = 0.0;
  for (const auto& t : trials) max_time = std::max(max_time, t.total_time_s);
  const auto rows = static_cast<std::size_t>(std::ceil(max_time / grid_dt_s)) + 1;
  const std::size_t best = best_trial_index(trials);
  CurveStats out;
  out.dt = grid_dt_s;
  std::vector<double> values(trials.size());
  for (std::size_t k = 0; k < rows; ++k) {
    const double t = static_cast<double>(k) * grid_dt_s;
    for (std::size_t i = 0; i < trials.size(); ++i) values[i] = sim::completion_at(trials[i].curve, t);
    out.time_s.push_back(t);
    out.mean_pct.push_back(mean(values));
    out.std_pct.push_back(population_std(values));
    out.best_pct.push_back(values[best]);
  }
  return out;
}

inline void finish_goal(GoalReport& g, double grid_dt) {
  std::vector<double> pct, time;
  for (const auto& t : g.trials) {
    pct.push_back(t.final_completion_pct);
    time.push_back(t.total_time_s);
  }
  g.mean_success_pct = mean(pct);
  g.mean_time_s = mean(time);
  g.best_trial = g.trials[best_trial_index(g.trials)].repeat_index;
  g.curves = curve_stats(g.trials, grid_dt);
}

inline Summary summarize(const std::vector<GoalReport>& goals) {
  std::vector<double> pct, time;
  for (const auto& g : goals) {
    pct.push_back(g.mean_success_pct);
    time.push_back(g.mean_time_s);
  }
  return {mean(pct), mean(time)};
}

struct ProtocolOptions {
  double grid_dt = kDefaultGridDt;
  bool parallel_goals = false;
  planner::PlanOptions plan;
};

/// Five consecutive trials of one goal. Planning happens once per trial; a
/// NO_PLAN goal yields five 0% trials whose trace holds only run_ended at
/// the charged planning time.
inline GoalReport run_goal(const GoalConfiguration& goal, std::size_t goal_index, const io::LayoutTemplate& layout,
                           const planner::Domains& domains, const sim::SimConfig& config,
                           const std::string& class_hash, const ProtocolOptions& options) {
  GoalReport report;
  report.goal_id = goal.id;
  report.required_pegs = goal.peg_connection_count();
  for (int rep = 1; rep <= kRepeats; ++rep) {
    sim::SimConfig trial_config = config;
    trial_config.seed = trial_seed(config.seed, goal_index, rep);
    TrialResult trial;
    trial.goal_id = goal.id;
    trial.repeat_index = rep;
    trial.seed = trial_config.seed;
    std::optional<planner::PlanResult> plan;
    const auto started = std::chrono::steady_clock::now();
    try {
      plan = planner::plan(goal, domains, options.plan);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPlan) throw;
      report.planned = false;
      report.plan_error = e.message();
    }
    if (plan) {
      trial.trace = sim::execute(*plan, goal, layout, trial_config, class_hash);
    } else {
      auto& t = trial.trace;
      t.goal_id = goal.id;
      t.seed = trial_config.seed;
      t.config_hash = class_hash;
      t.plan_hash = "none";
      t.planning_time_s = config.planning_time_override_s.value_or(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
      t.initial_state = io::initial_world_state(goal, layout, sim::kStartPlace);
      ExecutionEvent end;
      end.kind = EventKind::RunEnded;
      end.t_s = t.planning_time_s;
      end.note = "no plan";
      t.events.push_back(end);
      t.final_state = t.initial_state;
    }
    if (trial.trace.config_hash != class_hash)
      throw Error(ErrorCode::ProtocolError, "trial config hash differs from the class config hash");
    trial.curve = sim::replay(trial.trace, goal);
    trial.final_completion_pct = plan ? satisfaction(trial.trace.final_state, goal).completion_pct : 0.0;
    trial.total_time_s = trial.trace.end_time_s();
    report.trials.push_back(std::move(trial));
  }
  finish_goal(report, options.grid_dt);
  return report;
}

/// Runs the protocol over the three goals of `cls`. With `parallel_goals`
/// the goals run concurrently; results are identical to a sequential run.
inline BenchmarkReport run_protocol(GoalClass cls, const io::AssemblyCatalog& catalog, const planner::Domains& domains,
                                   const sim::SimConfig& config, const ProtocolOptions& options = {}) {
  sim::validate(config);
  if (!(options.grid_dt > 0) || !std::isfinite(options.grid_dt))
    throw Error(ErrorCode::GridError, "grid spacing must be positive");
  BenchmarkReport report;
  report.goal_class = cls;
  report.seed = config.seed;
  report.config_hash = sim::config_hash(config);
  report.grid_dt = options.grid_dt;
  const auto goals = catalog.goals_of(cls);
  if (goals.empty()) throw Error(ErrorCode::ProtocolError, "catalog has no goals of this class");
  if (options.parallel_goals) {
    std::vector<std::future<GoalReport>> jobs;
    for (std::size_t i = 0; i < goals.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return run_goal(*goals[i], i, catalog.layout, domains, config, report.config_hash, options);
      }));
    for (auto& j : jobs) report.per_goal.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < goals.size(); ++i)
      report.per_goal.push_back(run_goal(*goals[i], i, catalog.layout, domains, config, report.config_hash, options));
  }
  report.summary = summarize(report.per_goal);
  return report;
}

/// Shortest round-trip decimal form, independent of locale.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string trace_file_name(const std::string& goal_id, int repeat) {
  return "traces/" + goal_id + "-" + std::to_string(repeat) + ".jsonl";
}

inline nlohmann::json report_to_json(const BenchmarkReport& r) {
  nlohmann::json j;
  j["class"] = std::string(to_string(r.goal_class));
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["grid_dt_s"] = r.grid_dt;
  nlohmann::json goals = nlohmann::json::array();
  for (const auto& g : r.per_goal) {
    nlohmann::json gj;
    gj["goal"] = g.goal_id;
    gj["required_pegs"] = g.required_pegs;
    gj["planned"] = g.planned;
    if (!g.planned) gj["plan_error"] = g.plan_error;
    gj["best_trial"] = g.best_trial;
    gj["mean_success_pct"] = g.mean_success_pct;
    gj["mean_time_s"] = g.mean_time_s;
    gj["curve"] = "curve-" + g.goal_id + ".csv";
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : g.trials) {
      trials.push_back({{"repeat", t.repeat_index},
                        {"seed", t.seed},
                        {"final_completion_pct", t.final_completion_pct},
                        {"total_time_s", t.total_time_s},
                        {"planning_time_s", t.trace.planning_time_s},
                        {"plan_hash", t.trace.plan_hash},
                        {"trace", trace_file_name(g.goal_id, t.repeat_index)}});
    }
    gj["trials"] = std::move(trials);
    goals.push_back(std::move(gj));
  }
  j["goals"] = std::move(goals);
  j["summary"] = {{"mean_success_pct", r.summary.mean_success_pct}, {"mean_time_s", r.summary.mean_time_s}};
  return j;
}

inline std::string summary_csv(const BenchmarkReport& r) {
  std::string out = "goal,mean_success_pct,mean_time_s,best_trial\n";
  for (const auto& g : r.per_goal)
    out += g.goal_id + "," + format_number(g.mean_success_pct) + "," + format_number(g.mean_time_s) + "," +
           std::to_string(g.best_trial) + "\n";
  out += "all," + format_number(r.summary.mean_success_pct) + "," + format_number(r.summary.mean_time_s) + ",\n";
  return out;
}

inline std::string curve_csv(const CurveStats& c) {
  std::string out = "time_s,mean_pct,std_pct,best_pct\n";
  for (std::size_t k = 0; k < c.time_s.size(); ++k)
    out += format_number(c.time_s[k]) + "," + format_number(c.mean_pct[k]) + "," + format_number(c.std_pct[k]) + "," +
           format_number(c.best_pct[k]) + "\n";
  return out;
}

/// Writes report.json, summary.csv, curve-<goal>.csv, traces/ and the goal
/// files the traces refer to (goals/<goal>.xml), so the directory can be
/// re-verified on its own.
inline void emit_report(const BenchmarkReport& r, const std::filesystem::path& out_dir,
                        const io::AssemblyCatalog& catalog) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "traces", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "goals", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  io::write_file(out_dir / "report.json", report_to_json(r).dump(2) + "\n");
  io::write_file(out_dir / "summary.csv", summary_csv(r));
  for (const auto& g : r.per_goal) {
    io::write_file(out_dir / ("curve-" + g.goal_id + ".csv"), curve_csv(g.curves));
    for (const auto& t : g.trials)
      io::write_file(out_dir / trace_file_name(g.goal_id, t.repeat_index), sim::trace_to_jsonl(t.trace));
    const GoalConfiguration* goal = catalog.goal(g.goal_id);
    if (!goal) throw Error(ErrorCode::ProtocolError, "report names unknown goal " + g.goal_id);
    io::write_file(out_dir / "goals" / (g.goal_id + ".xml"), io::serialize_goal(*goal));
  }
}

/// Result of re-deriving a report from its trace files.
struct Verification {
  bool ok = true;
  std::vector<std::string> problems;
  Summary recomputed;
};

inline bool close_rel(double a, double b, double rel = 1e-9) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

/// Re-reads every trace listed in report.json, replays it and recomputes
/// per-trial, per-goal and summary figures.
inline Verification verify_report(const std::filesystem::path& dir) {
  Verification v;
  auto problem = [&](const std::string& msg) {
    v.ok = false;
    v.problems.push_back(msg);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(dir / "report.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedTrace, std::string("report.json: ") + e.what());
  }
  std::vector<GoalReport> goals;
  try {
    for (const auto& gj : j.at("goals")) {
      GoalReport g;
      g.goal_id = gj.at("goal").get<std::string>();
      const GoalConfiguration goal = io::parse_goal(io::read_file(dir / "goals" / (g.goal_id + ".xml")));
      const bool planned = gj.at("planned").get<bool>();
      std::vector<double> pct, time;
      for (const auto& tj : gj.at("trials")) {
        const std::string rel = tj.at("trace").get<std::string>();
        sim::ExecutionTrace t = sim::parse_trace(io::read_file(dir / rel), goal, sim::replay_layout());
        if (t.config_hash != j.at("config_hash").get<std::string>()) problem(rel + ": config hash differs");
        const double p = planned ? satisfaction(t.final_state, goal).completion_pct : 0.0;
        const double time_s = t.end_time_s();
        if (!close_rel(p, tj.at("final_completion_pct").get<double>())) problem(rel + ": completion mismatch");
        if (!close_rel(time_s, tj.at("total_time_s").get<double>())) problem(rel + ": total time mismatch");
        pct.push_back(p);
        time.push_back(time_s);
      }
      if (pct.size() != static_cast<std::size_t>(kRepeats)) problem(g.goal_id + ": expected 5 trials");
      g.mean_success_pct = mean(pct);
      g.mean_time_s = mean(time);
      if (!close_rel(g.mean_success_pct, gj.at("mean_success_pct").get<double>()))
        problem(g.goal_id + ": mean success mismatch");
      if (!close_rel(g.mean_time_s, gj.at("mean_time_s").get<double>())) problem(g.goal_id + ": mean time mismatch");
      goals.push_back(std::move(g));
    }
    v.recomputed = summarize(goals);
    const auto& s = j.at("summary");
    if (!close_rel(v.recomputed.mean_success_pct, s.at("mean_success_pct").get<double>()))
      problem("summary mean success mismatch");
    if (!close_rel(v.recomputed.mean_time_s, s.at("mean_time_s").get<double>())) problem("summary mean time mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedTrace, std::string("report.json: ") + e.what());
  }
  return v;
}

}  // namespace ramp::bench
