#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "ramp/sim/execute.hpp"
#include "ramp/sim/trace.hpp"
#include "support.hpp"

using namespace ramp;
using namespace ramp::sim;

namespace {

const planner::Domains& shipped_domains() {
  static const planner::Domains d = planner::Domains::load(test::domains_dir());
  return d;
}

const planner::PlanResult& plan_of(const std::string& goal_id) {
  static std::map<std::string, planner::PlanResult> cache;
  auto it = cache.find(goal_id);
  if (it == cache.end()) it = cache.emplace(goal_id, planner::plan(test::shipped_goal(goal_id), shipped_domains())).first;
  return it->second;
}

const io::LayoutTemplate& layout() { return test::shipped_catalog().layout; }

SimConfig shipped_config() {
  return parse_config(io::read_file(test::source_dir() / "configs" / "baseline_emulation.toml"));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("no error raised");
}

ExecutionTrace run(const std::string& goal_id, const SimConfig& c) {
  return execute(plan_of(goal_id), test::shipped_goal(goal_id), layout(), c);
}

std::size_t count(const ExecutionTrace& t, EventKind k) {
  return static_cast<std::size_t>(
      std::count_if(t.events.begin(), t.events.end(), [&](const ExecutionEvent& e) { return e.kind == k; }));
}

/// End time rebuilt from the config and the per-attempt draws alone.
double expected_end(const ExecutionTrace& t, const SimConfig& c) {
  double now = t.planning_time_s;
  std::uint64_t index = 0;
  bool first = true;
  for (const auto& e : t.events) {
    const bool skipped = e.kind == EventKind::SkillFailed && e.note == "skipped: precondition";
    const bool begins = skipped || (e.kind == EventKind::SkillStarted && e.attempt_index == 0);
    if (begins) {
      if (!first) ++index;
      first = false;
    }
    if (e.kind != EventKind::SkillStarted) continue;
    const SkillModel& m = c.model(*e.skill);
    const auto k = static_cast<std::uint64_t>(e.attempt_index);
    const AttemptDraws d = draw_attempt(c.seed, index, k);
    now += k == 0 ? m.base_duration_s + m.duration_jitter_s * (2.0 * d.duration - 1.0) : m.retry_duration_s;
  }
  return now;
}

SimConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SimConfig c = ideal_config(rng());
  for (auto& [s, m] : c.models) {
    m.base_duration_s = 0.5 + 20.0 * u(rng);
    m.duration_jitter_s = m.base_duration_s * u(rng);
    m.success_prob = u(rng) < 0.3 ? 1.0 : 0.5 + 0.5 * u(rng);
    if (has_retry_model(s)) {
      m.retries = static_cast<int>(rng() % 4);
      m.retry_duration_s = 1.0 + 10.0 * u(rng);
      m.retry_success_prob = u(rng);
    }
  }
  c.failure_propagation = u(rng) < 0.5 ? FailurePropagation::Strict : FailurePropagation::Independent;
  c.peg_drop_prob = u(rng);
  c.planning_time_override_s = 1.0 + 300.0 * u(rng);
  return c;
}

}  // namespace

TEST(Config, ShippedConfigParses) {
  SimConfig c = shipped_config();
  EXPECT_EQ(c.models.size(), std::size(kAllSkills));
  ASSERT_TRUE(c.planning_time_override_s.has_value());
  EXPECT_EQ(*c.planning_time_override_s, 190.0);
  EXPECT_EQ(config_hash(c), config_hash(shipped_config()));
}

TEST(Config, BadFixtureIsConfigError) {
  EXPECT_EQ(code_of([] { parse_config(io::read_file(test::fixture("bad_config.toml"))); }), ErrorCode::ConfigError);
}

TEST(Config, ConstraintViolations) {
  std::vector<std::function<void(SimConfig&)>> breakers = {
      [](SimConfig& c) { c.models.erase(Skill::Fasten); },
      [](SimConfig& c) { c.models.at(Skill::Move).success_prob = 1.5; },
      [](SimConfig& c) { c.models.at(Skill::Move).retries = 1; },
      [](SimConfig& c) { c.models.at(Skill::PickUp).duration_jitter_s = 2.0; },
      [](SimConfig& c) { c.models.at(Skill::Push).base_duration_s = 0.0; },
      [](SimConfig& c) { c.models.at(Skill::Fasten).retry_success_prob = -0.1; },
      [](SimConfig& c) { c.peg_drop_prob = 2.0; },
      [](SimConfig& c) { c.planning_time_override_s = 0.0; },
  };
  for (std::size_t i = 0; i < breakers.size(); ++i) {
    SimConfig c = ideal_config();
    EXPECT_NO_THROW(validate(c));
    breakers[i](c);
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::ConfigError) << "case " << i;
    EXPECT_EQ(code_of([&] { execute(plan_of("easy-1"), test::shipped_goal("easy-1"), layout(), c); }),
              ErrorCode::ConfigError)
        << "case " << i;
  }
}

TEST(Config, UnknownKeysRejected) {
  const std::string text = io::read_file(test::source_dir() / "configs" / "baseline_emulation.toml");
  EXPECT_EQ(code_of([&] { parse_config(text + "\nbogus = 1\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse_config(text + "\n[models.weld]\nbase_duration_s = 1.0\nsuccess_prob = 1.0\n"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_config("seed = -3"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_config("seed = [1"); }), ErrorCode::ConfigError);
}

TEST(Execute, IdealConfigCompletesEveryEasyGoal) {
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) {
    SimConfig c = ideal_config(3, 2.0);
    c.planning_time_override_s = 190.0;
    ExecutionTrace t = run(g->id, c);
    const std::size_t n = plan_of(g->id).fine.flattened().size();
    EXPECT_EQ(satisfaction(t.final_state, *g).completion_pct, 100.0) << g->id;
    EXPECT_EQ(count(t, EventKind::SkillStarted), n);
    EXPECT_EQ(count(t, EventKind::SkillSucceeded), n);
    EXPECT_EQ(count(t, EventKind::SkillFailed), 0u);
    EXPECT_EQ(count(t, EventKind::PegInserted), g->peg_connection_count());
    EXPECT_EQ(t.end_time_s(), 190.0 + 2.0 * static_cast<double>(n)) << g->id;
    EXPECT_EQ(t.events.back().kind, EventKind::RunEnded);
  }
}

TEST(Execute, FastenThatNeverSucceedsExhaustsRetries) {
  SimConfig c = ideal_config(5);
  auto& f = c.models.at(Skill::Fasten);
  f.success_prob = 0.0;
  f.retries = 2;
  f.retry_success_prob = 0.0;
  c.peg_drop_prob = 0.0;
  c.failure_propagation = FailurePropagation::Independent;
  ExecutionTrace t = run("easy-1", c);
  std::vector<std::pair<EventKind, int>> seen;
  for (const auto& e : t.events)
    if (e.skill == Skill::Fasten) seen.emplace_back(e.kind, e.attempt_index);
  ASSERT_FALSE(seen.empty());
  ASSERT_EQ(seen.size() % 4, 0u);
  for (std::size_t i = 0; i < seen.size(); i += 4) {
    EXPECT_EQ(seen[i], std::make_pair(EventKind::SkillStarted, 0));
    EXPECT_EQ(seen[i + 1], std::make_pair(EventKind::SkillStarted, 1));
    EXPECT_EQ(seen[i + 2], std::make_pair(EventKind::SkillStarted, 2));
    EXPECT_EQ(seen[i + 3], std::make_pair(EventKind::SkillFailed, 2));
  }
  EXPECT_EQ(count(t, EventKind::PegInserted), 0u);
  EXPECT_EQ(satisfaction(t.final_state, test::shipped_goal("easy-1")).completion_pct, 0.0);
}

TEST(Execute, StrictModeSkipsDependents) {
  SimConfig c = ideal_config(5);
  c.models.at(Skill::Fasten).success_prob = 0.0;
  c.peg_drop_prob = 0.0;
  ExecutionTrace t = run("easy-1", c);
  std::size_t skipped = 0;
  for (const auto& e : t.events) {
    if (e.note != "skipped: precondition") continue;
    ++skipped;
    EXPECT_EQ(e.kind, EventKind::SkillFailed);
    EXPECT_EQ(e.attempt_index, 0);
  }
  EXPECT_GT(skipped, 0u);
  // skips cost nothing
  EXPECT_DOUBLE_EQ(t.end_time_s(), expected_end(t, c));
}

TEST(Execute, SameSeedSameBytes) {
  SimConfig c = shipped_config();
  c.seed = 42;
  const std::string a = trace_to_jsonl(run("easy-1", c));
  EXPECT_EQ(a, trace_to_jsonl(run("easy-1", c)));
  c.seed = 43;
  EXPECT_NE(a, trace_to_jsonl(run("easy-1", c)));
}

TEST(Execute, PlanningTimeStartsTheClock) {
  SimConfig c = ideal_config(1, 1.0);
  c.planning_time_override_s = 185.5;
  ExecutionTrace t = run("easy-2", c);
  EXPECT_EQ(t.planning_time_s, 185.5);
  EXPECT_EQ(t.events.front().t_s, 185.5);
  c.planning_time_override_s.reset();
  ExecutionTrace measured = run("easy-2", c);
  EXPECT_EQ(measured.planning_time_s, plan_of("easy-2").stats.wall_time_s);
}

TEST(Replay, SyntheticInsertionsGiveThirds) {
  const GoalConfiguration& g = test::shipped_goal("easy-1");
  WorldState init = io::initial_world_state(g, layout(), kStartPlace);
  std::vector<ExecutionEvent> events;
  auto succeed = [&](double t, Skill s, Thing obj, std::vector<Connection> cs = {}) {
    ExecutionEvent e;
    e.t_s = t;
    e.kind = EventKind::SkillSucceeded;
    e.skill = s;
    e.object = obj;
    e.connections = std::move(cs);
    events.push_back(e);
  };
  const std::vector<std::pair<std::string, Connection>> order = {
      {"b1", test::conn("b0", 0, "b1", 0)}, {"b4", test::conn("b0", 2, "b4", 0)}, {"b5", test::conn("b4", 1, "b5", 0)}};
  double t = 10.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& [beam, c] = order[i];
    const std::string peg = io::LayoutTemplate::peg_id(i);
    succeed(t, Skill::PickUp, {ThingKind::Beam, beam});
    succeed(t + 1, Skill::AssembleSquare, {ThingKind::Beam, beam}, {c});
    succeed(t + 2, Skill::PickUp, {ThingKind::Peg, peg});
    ExecutionEvent ins;
    ins.t_s = 300.0 + 100.0 * static_cast<double>(i);
    ins.kind = EventKind::PegInserted;
    ins.skill = Skill::Fasten;
    ins.object = Thing{ThingKind::Peg, peg};
    ins.connections = {c};
    events.push_back(ins);
    t = ins.t_s + 1;
  }
  auto curve = replay(events, g, init);
  EXPECT_EQ(completion_at(curve, 0.0), 0.0);
  EXPECT_EQ(completion_at(curve, 299.999), 0.0);
  EXPECT_NEAR(completion_at(curve, 300.0), 100.0 / 3.0, 1e-9);
  EXPECT_NEAR(completion_at(curve, 399.0), 100.0 / 3.0, 1e-9);
  EXPECT_NEAR(completion_at(curve, 400.0), 200.0 / 3.0, 1e-9);
  EXPECT_EQ(completion_at(curve, 500.0), 100.0);
  EXPECT_EQ(completion_at(curve, 1e6), 100.0);
}

TEST(Replay, EmptyTraceIsFlatZero) {
  const GoalConfiguration& g = test::shipped_goal("easy-1");
  auto curve = replay({}, g, io::initial_world_state(g, layout(), kStartPlace));
  for (double t : {0.0, 10.0, 1e5}) EXPECT_EQ(completion_at(curve, t), 0.0);
}

TEST(Replay, PerfectRunReachesFullAtRunEnd) {
  SimConfig c = shipped_config();
  for (auto& [s, m] : c.models) {
    m.success_prob = 1.0;
    m.retry_success_prob = 1.0;
  }
  ExecutionTrace t = run("easy-3", c);
  auto curve = replay(t, test::shipped_goal("easy-3"));
  EXPECT_EQ(completion_at(curve, t.end_time_s()), 100.0);
  EXPECT_LT(completion_at(curve, t.planning_time_s), 100.0);
}

TEST(Trace, RoundTrip) {
  SimConfig c = shipped_config();
  c.seed = 11;
  ExecutionTrace t = run("easy-2", c);
  const std::string text = trace_to_jsonl(t);
  ExecutionTrace back = parse_trace(text, test::shipped_goal("easy-2"), layout());
  EXPECT_EQ(back.events, t.events);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.config_hash, t.config_hash);
  EXPECT_EQ(back.plan_hash, t.plan_hash);
  EXPECT_EQ(back.planning_time_s, t.planning_time_s);
  EXPECT_EQ(back.final_state, t.final_state);
  EXPECT_EQ(trace_to_jsonl(back), text);
}

TEST(Trace, TimestampRegressionIsMalformed) {
  ExecutionTrace t = run("easy-1", shipped_config());
  ASSERT_GT(t.events.size(), 3u);
  t.events[2].t_s = t.events[1].t_s - 1.0;
  const auto& g = test::shipped_goal("easy-1");
  EXPECT_EQ(code_of([&] { parse_trace(trace_to_jsonl(t), g, layout()); }), ErrorCode::MalformedTrace);
  EXPECT_EQ(code_of([&] { replay(t, g); }), ErrorCode::MalformedTrace);
}

TEST(Trace, IllegalEventIsMalformed) {
  ExecutionTrace t = run("easy-1", ideal_config(1));
  const auto& g = test::shipped_goal("easy-1");
  // an insertion before anything is mated
  ExecutionEvent bad;
  bad.t_s = t.events.front().t_s;
  bad.kind = EventKind::PegInserted;
  bad.object = Thing{ThingKind::Peg, "p01"};
  bad.connections = {*g.connections.begin()};
  t.events.insert(t.events.begin(), bad);
  EXPECT_EQ(code_of([&] { parse_trace(trace_to_jsonl(t), g, layout()); }), ErrorCode::MalformedTrace);
  EXPECT_EQ(code_of([&] { parse_trace("{\"seed\":1}\nnot json\n", g, layout()); }), ErrorCode::MalformedTrace);
}

TEST(ExecuteProperty, TimeAccounting) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> goals = {"easy-1", "easy-2", "easy-3"};
  for (int i = 0; i < 150; ++i) {
    SimConfig c = random_config(rng);
    const std::string& id = goals[static_cast<std::size_t>(i) % goals.size()];
    ExecutionTrace t = run(id, c);
    double last = t.planning_time_s;
    for (const auto& e : t.events) {
      ASSERT_GE(e.t_s, last);
      last = e.t_s;
    }
    ASSERT_EQ(t.events.back().kind, EventKind::RunEnded);
    const double want = expected_end(t, c);
    ASSERT_NEAR(t.end_time_s(), want, 1e-9 * std::abs(want)) << id << " run " << i;
  }
}

TEST(ExecuteProperty, LoweringASuccessProbabilityNeverAddsSuccesses) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> goals = {"easy-1", "easy-2", "easy-3"};
  for (int i = 0; i < 150; ++i) {
    SimConfig hi = random_config(rng);
    SimConfig lo = hi;
    const Skill s = kAllSkills[rng() % std::size(kAllSkills)];
    lo.models.at(s).success_prob *= u(rng);
    lo.models.at(s).retry_success_prob *= u(rng);
    const std::string& id = goals[static_cast<std::size_t>(i) % goals.size()];
    ExecutionTrace a = run(id, hi), b = run(id, lo);
    ASSERT_LE(count(b, EventKind::SkillSucceeded), count(a, EventKind::SkillSucceeded)) << id << " run " << i;
    ASSERT_LE(count(b, EventKind::PegInserted), count(a, EventKind::PegInserted)) << id << " run " << i;
  }
}

TEST(ExecuteProperty, StrictSuccessesAreExecutable) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 60; ++i) {
    SimConfig c = random_config(rng);
    c.failure_propagation = FailurePropagation::Strict;
    const std::string id = "easy-" + std::to_string(1 + i % 3);
    const planner::PlanResult& p = plan_of(id);
    const al::GroundedDomain& g = *p.fine.domain;
    ExecutionTrace t = run(id, c);
    al::SymbolicState actual = p.fine.init;
    for (const auto& e : t.events) {
      if (e.kind == EventKind::SkillSucceeded) {
        std::string name = std::string(to_string(*e.skill)) + "(";
        for (std::size_t k = 0; k < e.args.size(); ++k) name += (k ? "," : "") + e.args[k];
        auto a = g.find_action(name + ")");
        ASSERT_TRUE(a.has_value()) << name;
        ASSERT_TRUE(al::applicable(g, actual, *a)) << id << " run " << i << " " << name;
        actual = al::successor(g, actual, *a);
      } else if (e.kind == EventKind::PegDropped) {
        auto a = g.find_action("drop(" + planner::kRobot + "," + e.object->id + ")");
        ASSERT_TRUE(a.has_value());
        actual = al::forced_successor(g, actual, *a);
      }
    }
  }
}
