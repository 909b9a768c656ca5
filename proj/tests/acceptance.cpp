// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "ramp/bench/harness.hpp"
#include "support.hpp"

using namespace ramp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

const planner::Domains& domains() {
  static const planner::Domains d = planner::Domains::load(test::domains_dir());
  return d;
}

sim::SimConfig shipped_config() {
  return sim::parse_config(io::read_file(test::source_dir() / "configs" / "baseline_emulation.toml"));
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

// 1
Outcome easy_plans_complete() {
  Check c;
  const auto t0 = Clock::now();
  sim::SimConfig ideal = sim::ideal_config(1, 1.0);
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) {
    planner::PlanResult r = planner::plan(*g, domains());
    sim::ExecutionTrace t = sim::execute(r, *g, test::shipped_catalog().layout, ideal);
    SatisfactionReport s = satisfaction(t.final_state, *g);
    c.require(s.completion_pct == 100.0, g->id + " completion " + std::to_string(s.completion_pct));
    for (const auto& [conn, status] : s.per_connection) {
      const auto want = conn.requires_peg ? ConnectionStatus::Fastened : ConnectionStatus::MatedOnly;
      c.require(status == want, g->id + " connection " + to_string(conn) + " is " + std::string(to_string(status)));
    }
    c.require(!t.final_state.invariant_violation(), g->id + " final state breaks an invariant");
  }
  const double secs = seconds_since(t0);
  c.require(secs < 60.0, "took " + std::to_string(secs) + " s");
  if (c.out.pass) c.out.detail = "3 easy goals at 100% in " + std::to_string(secs) + " s";
  return c.out;
}

GoalConfiguration toy(const std::string& id, std::vector<std::string> beam_ids, std::set<Connection> connections) {
  GoalConfiguration g;
  g.id = id;
  g.goal_class = GoalClass::Hard;
  for (const auto& b : beam_ids) g.beams.push_back(*test::shipped_catalog().beam(b));
  std::sort(g.beams.begin(), g.beams.end(), [](const BeamSpec& a, const BeamSpec& b) { return a.id < b.id; });
  g.connections = std::move(connections);
  return g;
}

// 2
Outcome oracle_equivalence() {
  using test::conn;
  Check c;
  const std::vector<GoalConfiguration> toys = {
      toy("one-peg", {"b0", "b1"}, {conn("b0", 0, "b1", 0)}),
      toy("no-peg", {"b0", "b1"}, {conn("b0", 0, "b1", 0, false)}),
      toy("two-pegs-one-beam", {"b0", "b1"}, {conn("b0", 0, "b1", 0), conn("b0", 1, "b1", 1)}),
      toy("two-beams", {"b0", "b1", "b2"}, {conn("b0", 0, "b1", 0), conn("b0", 3, "b2", 0)}),
      toy("cap-plain", {"b0", "b1", "b6"}, {conn("b0", 0, "b1", 0), conn("b1", 1, "b6", 0, false)}),
      toy("cap-pegged", {"b0", "b2", "b6"}, {conn("b0", 3, "b2", 0, false), conn("b2", 1, "b6", 1)}),
  };
  std::ostringstream horizons;
  for (const auto& g : toys) {
    planner::RampModel m = planner::build_model(g);
    c.require(m.movable_beams.size() <= 2 && g.peg_connection_count() <= 2, g.id + " is not a toy");
    al::GroundedDomain cg = al::ground(domains().coarse, m.coarse_instance);
    planner::CoarsePlan p = planner::plan_coarse(cg, planner::History{m.coarse_init}, m.coarse_goal);
    const auto t0 = Clock::now();
    auto oracle = planner::bfs_oracle(cg, al::make_state(cg, m.coarse_init), planner::goal_literals(cg, m.coarse_goal));
    const double secs = seconds_since(t0);
    c.require(oracle.has_value(), g.id + ": oracle found no plan");
    c.require(oracle && static_cast<int>(p.horizon()) == *oracle,
              g.id + ": planner " + std::to_string(p.horizon()) + " vs oracle " + std::to_string(oracle.value_or(-1)));
    c.require(secs < 10.0, g.id + ": oracle took " + std::to_string(secs) + " s");
    horizons << " " << g.id << "=" << p.horizon();
  }
  if (c.out.pass) c.out.detail = std::to_string(toys.size()) + " toys, horizons" + horizons.str();
  return c.out;
}

// 3
Outcome peg_counts() {
  Check c;
  std::ostringstream detail;
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) {
    const std::size_t n = planner::plan(*g, domains()).fine.count("fasten");
    c.require(n >= 3 && n <= 4, g->id + " has " + std::to_string(n) + " fasten actions");
    detail << " " << g->id << ":" << n;
  }
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Medium)) {
    const std::string text = io::read_file(test::catalog_dir() / "goals" / (g->id + ".xml"));
    const std::size_t n = occurrences(text, "requires_peg=\"true\"");
    c.require(n >= 4 && n <= 8, g->id + " declares " + std::to_string(n) + " pegs");
    c.require(n == g->peg_connection_count(), g->id + " parsed count differs from file");
    c.require(validate_goal(*g, test::shipped_catalog().beams).ok(), g->id + " fails catalog validation");
    detail << " " << g->id << ":" << n;
  }
  if (c.out.pass) c.out.detail = "fasten/peg counts" + detail.str();
  return c.out;
}

// 4
Outcome refinement_coherence() {
  Check c;
  std::size_t checked = 0;
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) {
    planner::PlanResult r = planner::plan(*g, domains());
    c.require(r.fine.segments.size() == r.coarse_plan.horizon(), g->id + ": segment count differs from horizon");
    al::SymbolicState cur = r.fine.init;
    c.require(r.bridge->abstract(cur) == r.coarse_plan.steps.front().pre, g->id + ": initial states disagree");
    for (std::size_t i = 0; i < r.fine.segments.size() && i < r.coarse_plan.steps.size(); ++i) {
      for (int a : r.fine.segments[i].actions) {
        if (!al::applicable(*r.fine.domain, cur, a)) {
          c.require(false, g->id + ": " + r.fine.domain->action_name(a) + " not executable");
          return c.out;
        }
        cur = al::successor(*r.fine.domain, cur, a);
      }
      c.require(r.bridge->abstract(cur) == r.coarse_plan.steps[i].post,
                g->id + ": segment " + std::to_string(i + 1) + " abstracts to the wrong state");
      ++checked;
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(checked) + " segments match their coarse post-states";
  return c.out;
}

// 5
Outcome metrics_pipeline() {
  Check c;
  const sim::SimConfig base = shipped_config();
  c.require(base.planning_time_override_s && *base.planning_time_override_s >= 180.0 &&
                *base.planning_time_override_s <= 200.0,
            "planning override outside 180-200 s");
  std::vector<std::uint64_t> seeds = {base.seed};
  for (std::uint64_t s = 1; s <= 10; ++s)
    if (s != base.seed) seeds.push_back(s);
  double lo_pct = 1e9, hi_pct = -1e9, lo_t = 1e9, hi_t = -1e9;
  for (std::uint64_t seed : seeds) {
    sim::SimConfig cfg = base;
    cfg.seed = seed;
    bench::BenchmarkReport r = bench::run_protocol(GoalClass::Easy, test::shipped_catalog(), domains(), cfg);
    const double pct = r.summary.mean_success_pct, t = r.summary.mean_time_s;
    lo_pct = std::min(lo_pct, pct), hi_pct = std::max(hi_pct, pct);
    lo_t = std::min(lo_t, t), hi_t = std::max(hi_t, t);
    c.require(std::fabs(pct - 84.0) <= 10.0, "seed " + std::to_string(seed) + ": success " + std::to_string(pct));
    c.require(std::fabs(t - 580.0) <= 0.2 * 580.0, "seed " + std::to_string(seed) + ": time " + std::to_string(t));
  }
  std::ostringstream d;
  d << seeds.size() << " seeds, success " << lo_pct << ".." << hi_pct << " %, time " << lo_t << ".." << hi_t << " s";
  if (c.out.pass) c.out.detail = d.str();
  else c.out.detail += " (" + d.str() + ")";
  return c.out;
}

std::string slurp_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += fs::relative(f, dir).string() + "\n" + io::read_file(f);
  return out;
}

// 6
Outcome determinism() {
  Check c;
  const sim::SimConfig cfg = shipped_config();
  std::vector<std::string> dumps;
  for (const char* name : {"accept-det-a", "accept-det-b"}) {
    const fs::path dir = test::temp_dir(name);
    bench::emit_report(bench::run_protocol(GoalClass::Easy, test::shipped_catalog(), domains(), cfg), dir,
                       test::shipped_catalog());
    dumps.push_back(slurp_dir(dir));
  }
  c.require(dumps[0] == dumps[1], "output directories differ");
  if (c.out.pass) c.out.detail = "two runs, " + std::to_string(dumps[0].size()) + " identical bytes";
  return c.out;
}

// 7
Outcome semantics() {
  Check c;
  const GoalConfiguration& goal = test::shipped_goal("easy-1");
  planner::RampModel m = planner::build_model(goal);
  al::GroundedDomain g = al::ground(domains().coarse, m.coarse_instance);
  auto act = [&](const std::string& name) {
    auto a = g.find_action(name);
    if (!a) throw std::runtime_error("no action " + name);
    return *a;
  };
  auto holds = [&](const al::SymbolicState& s, const std::string& atom) {
    auto i = g.find_atom(atom);
    if (!i) throw std::runtime_error("no fluent " + atom);
    return s.holds(*i);
  };
  const std::string rob = planner::kRobot;
  al::SymbolicState s = al::make_state(g, m.coarse_init);
  if (!holds(s, "loc(" + rob + ",template)")) s = al::successor(g, s, act("move(" + rob + ",template)"));
  s = al::successor(g, s, act("pick_up(" + rob + ",b1)"));
  c.require(holds(s, "in_hand(" + rob + ",b1)"), "pick_up did not take b1");

  // held object follows the robot
  std::string dest;
  for (const auto& p : planner::kCoarsePlaces)
    if (p != "template" && al::applicable(g, s, act("move(" + rob + "," + p + ")"))) dest = p;
  c.require(!dest.empty(), "no move out of template");
  if (dest.empty()) return c.out;
  al::SymbolicState moved = al::successor(g, s, act("move(" + rob + "," + dest + ")"));
  c.require(holds(moved, "loc(b1," + dest + ")"), "held b1 did not follow the robot");
  c.require(!holds(moved, "loc(b1,template)"), "b1 still on the template");
  c.require(holds(moved, "in_hand(" + rob + ",b1)"), "move released b1");

  // pick_up blocked while holding
  const int second = act("pick_up(" + rob + ",b4)");
  c.require(!al::applicable(g, s, second), "pick_up allowed with a full hand");
  bool raised = false;
  try {
    al::successor(g, s, second);
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::NotApplicable;
  }
  c.require(raised, "successor of a blocked pick_up did not raise NOT_APPLICABLE");

  // putdown clears in_hand
  al::SymbolicState down = al::successor(g, moved, act("putdown(" + rob + ",b1)"));
  c.require(!holds(down, "in_hand(" + rob + ",b1)"), "putdown left b1 in hand");
  c.require(holds(down, "loc(b1," + dest + ")"), "putdown moved b1");
  if (c.out.pass) c.out.detail = "putdown, carried location and blocked pick_up on the coarse easy-1 domain";
  return c.out;
}

// 8
Outcome aggregation_law() {
  Check c;
  const fs::path dir = test::temp_dir("accept-aggregate");
  bench::emit_report(bench::run_protocol(GoalClass::Easy, test::shipped_catalog(), domains(), shipped_config()), dir,
                     test::shipped_catalog());
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); };
  const auto report = nlohmann::json::parse(io::read_file(dir / "report.json"));
  double sum_pct = 0.0, sum_time = 0.0;
  std::size_t goals = 0;
  for (const auto& gj : report.at("goals")) {
    const std::string id = gj.at("goal").get<std::string>();
    const std::size_t required = occurrences(io::read_file(dir / "goals" / (id + ".xml")), "requires_peg=\"true\"");
    const bool planned = gj.at("planned").get<bool>();
    double goal_pct = 0.0, goal_time = 0.0;
    std::size_t trials = 0;
    for (const auto& tj : gj.at("trials")) {
      std::istringstream in(io::read_file(dir / tj.at("trace").get<std::string>()));
      std::string line;
      std::getline(in, line);  // header
      std::size_t inserted = 0;
      double end = -1.0;
      while (std::getline(in, line)) {
        const auto e = nlohmann::json::parse(line);
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "peg_inserted") ++inserted;
        if (kind == "run_ended") end = e.at("t_s").get<double>();
      }
      const double pct = !planned ? 0.0 : required == 0 ? 100.0 : 100.0 * static_cast<double>(inserted) / static_cast<double>(required);
      c.require(end >= 0, id + ": trace without run_ended");
      c.require(close(pct, tj.at("final_completion_pct").get<double>()), id + ": trial completion mismatch");
      c.require(close(end, tj.at("total_time_s").get<double>()), id + ": trial time mismatch");
      goal_pct += pct;
      goal_time += end;
      ++trials;
    }
    c.require(trials == 5, id + ": " + std::to_string(trials) + " trials");
    goal_pct /= static_cast<double>(trials);
    goal_time /= static_cast<double>(trials);
    c.require(close(goal_pct, gj.at("mean_success_pct").get<double>()), id + ": goal success mismatch");
    c.require(close(goal_time, gj.at("mean_time_s").get<double>()), id + ": goal time mismatch");
    sum_pct += goal_pct;
    sum_time += goal_time;
    ++goals;
  }
  const auto& s = report.at("summary");
  c.require(close(sum_pct / static_cast<double>(goals), s.at("mean_success_pct").get<double>()), "summary success mismatch");
  c.require(close(sum_time / static_cast<double>(goals), s.at("mean_time_s").get<double>()), "summary time mismatch");
  c.require(bench::verify_report(dir).ok, "verify_report disagrees");
  if (c.out.pass) c.out.detail = "report.json recomputed from " + std::to_string(goals * 5) + " raw traces";
  return c.out;
}

sim::SimConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sim::SimConfig c = sim::ideal_config(rng());
  for (auto& [s, m] : c.models) {
    m.base_duration_s = 0.5 + 20.0 * u(rng);
    m.duration_jitter_s = m.base_duration_s * u(rng);
    m.success_prob = u(rng) < 0.3 ? 1.0 : 0.5 + 0.5 * u(rng);
    if (sim::has_retry_model(s)) {
      m.retries = static_cast<int>(rng() % 4);
      m.retry_duration_s = 1.0 + 10.0 * u(rng);
      m.retry_success_prob = u(rng);
    }
  }
  c.failure_propagation = u(rng) < 0.5 ? sim::FailurePropagation::Strict : sim::FailurePropagation::Independent;
  c.peg_drop_prob = u(rng);
  c.planning_time_override_s = 1.0 + 300.0 * u(rng);
  return c;
}

double expected_end(const sim::ExecutionTrace& t, const sim::SimConfig& c) {
  double now = t.planning_time_s;
  std::uint64_t index = 0;
  bool first = true;
  for (const auto& e : t.events) {
    const bool skipped = e.kind == EventKind::SkillFailed && e.note == "skipped: precondition";
    if (skipped || (e.kind == EventKind::SkillStarted && e.attempt_index == 0)) {
      if (!first) ++index;
      first = false;
    }
    if (e.kind != EventKind::SkillStarted) continue;
    const sim::SkillModel& m = c.model(*e.skill);
    const auto k = static_cast<std::uint64_t>(e.attempt_index);
    const sim::AttemptDraws d = sim::draw_attempt(c.seed, index, k);
    now += k == 0 ? m.base_duration_s + m.duration_jitter_s * (2.0 * d.duration - 1.0) : m.retry_duration_s;
  }
  return now;
}

std::size_t successes(const sim::ExecutionTrace& t) {
  return static_cast<std::size_t>(std::count_if(t.events.begin(), t.events.end(), [](const ExecutionEvent& e) {
    return e.kind == EventKind::SkillSucceeded;
  }));
}

// 9
Outcome sim_properties() {
  Check c;
  std::vector<std::pair<const GoalConfiguration*, planner::PlanResult>> plans;
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) plans.emplace_back(g, planner::plan(*g, domains()));
  const auto& layout = test::shipped_catalog().layout;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t0 = Clock::now();
  const int runs = 1000;
  for (int i = 0; i < runs && c.out.pass; ++i) {
    const auto& [goal, plan] = plans[static_cast<std::size_t>(i) % plans.size()];
    sim::SimConfig hi = random_config(rng);
    sim::SimConfig lo = hi;
    const Skill s = kAllSkills[rng() % std::size(kAllSkills)];
    lo.models.at(s).success_prob *= u(rng);
    lo.models.at(s).retry_success_prob *= u(rng);
    sim::ExecutionTrace a = sim::execute(plan, *goal, layout, hi);
    sim::ExecutionTrace b = sim::execute(plan, *goal, layout, lo);
    const std::string tag = "run " + std::to_string(i) + " (" + goal->id + ")";
    c.require(successes(b) <= successes(a), tag + ": lowering " + std::string(to_string(s)) + " added successes");
    c.require(satisfaction(b.final_state, *goal).completion_pct <= satisfaction(a.final_state, *goal).completion_pct,
              tag + ": lowering " + std::string(to_string(s)) + " raised completion");
    for (const auto* t : {&a, &b}) {
      const sim::SimConfig& cfg = t == &a ? hi : lo;
      const double want = expected_end(*t, cfg);
      c.require(std::fabs(t->end_time_s() - want) <= 1e-9 * std::fabs(want), tag + ": time accounting off");
      double last = t->planning_time_s;
      for (const auto& e : t->events) {
        c.require(e.t_s >= last, tag + ": time goes backwards");
        last = e.t_s;
      }
    }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 60.0, "took " + std::to_string(secs) + " s");
  if (c.out.pass) c.out.detail = std::to_string(runs) + " randomized config pairs in " + std::to_string(secs) + " s";
  return c.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, easy_plans_complete}, {2, oracle_equivalence}, {3, peg_counts},
      {4, refinement_coherence}, {5, metrics_pipeline}, {6, determinism},
      {7, semantics}, {8, aggregation_law}, {9, sim_properties},
  };
  int failed = 0;
  for (const auto& [n, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
