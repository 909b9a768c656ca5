#pragma once

// Open-loop, seeded execution of a fine plan against parametric skill models.
//
// Randomness: every (seed, action index, attempt) triple owns its own
// generator. Each attempt draws three uniforms in this order: duration,
// success, drop. All three are drawn whether used or not, so lowering a
// success probability never shifts any other draw.
//
// Gating: an action proceeds only if it is executable in the actual fine
// state and every fluent it reads, or could change through a state
// constraint, still has the value the nominal (all-success) run gives it
// and got that value along the nominal route. A failed action invalidates
// what it should have changed. This makes a failure visible to every later
// action that depends on it, and keeps success counts monotone in the
// success probabilities.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ramp/al/semantics.hpp"
#include "ramp/core/world_state.hpp"
#include "ramp/io/goal_io.hpp"
#include "ramp/planner/refine.hpp"
#include "ramp/sim/config.hpp"

namespace ramp::sim {

inline const std::string kStartPlace = "assembly_approach";

struct ExecutionTrace {
  std::string goal_id;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string plan_hash;
  double planning_time_s = 0.0;
  std::vector<ExecutionEvent> events;
  WorldState initial_state;
  WorldState final_state;

  double end_time_s() const { return events.empty() ? planning_time_s : events.back().t_s; }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Three uniforms in [0, 1) for one attempt.
struct AttemptDraws {
  double duration = 0.0;
  double success = 0.0;
  double drop = 0.0;
};

inline AttemptDraws draw_attempt(std::uint64_t seed, std::uint64_t action_index, std::uint64_t attempt) {
  std::mt19937_64 eng(splitmix64(splitmix64(splitmix64(seed) ^ action_index) ^ attempt));
  auto u = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  AttemptDraws d;
  d.duration = u();
  d.success = u();
  d.drop = u();
  return d;
}

inline std::string plan_hash(const planner::PlanResult& r) {
  return hex64(fnv1a(planner::plan_to_json(r, false).dump()));
}

/// Planning time charged to a trial: the override when configured, the
/// measured wall time otherwise.
inline double charged_planning_time(const planner::PlanResult& r, const SimConfig& c) {
  return c.planning_time_override_s ? *c.planning_time_override_s : r.stats.wall_time_s;
}

/// Fluents an action reads or may change: its executability and causal-law
/// bodies, its direct effects, and everything reachable from those effects
/// through state constraints (heads and bodies).
inline std::vector<int> influence_scope(const al::GroundedDomain& g, int action) {
  const auto a = static_cast<std::size_t>(action);
  std::vector<bool> in_scope(g.atom_count(), false), affected(g.atom_count(), false);
  std::vector<int> queue;
  auto read = [&](int atom) { in_scope[static_cast<std::size_t>(atom)] = true; };
  auto affect = [&](int atom) {
    read(atom);
    if (!affected[static_cast<std::size_t>(atom)]) {
      affected[static_cast<std::size_t>(atom)] = true;
      queue.push_back(atom);
    }
  };
  for (int ei : g.exec_by_action[a])
    for (al::Lit l : g.executability[static_cast<std::size_t>(ei)].body) read(al::lit_atom(l));
  for (int li : g.causal_by_action[a]) {
    const auto& law = g.causal_laws[static_cast<std::size_t>(li)];
    for (al::Lit l : law.body) read(al::lit_atom(l));
    affect(al::lit_atom(law.head));
  }
  while (!queue.empty()) {
    const int atom = queue.back();
    queue.pop_back();
    for (bool neg : {false, true}) {
      for (int ci : g.constraints_by_body_lit[static_cast<std::size_t>(al::make_lit(atom, neg))]) {
        const auto& c = g.constraints[static_cast<std::size_t>(ci)];
        for (al::Lit l : c.body) read(al::lit_atom(l));
        affect(al::lit_atom(c.head));
      }
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < in_scope.size(); ++i)
    if (in_scope[i]) out.push_back(static_cast<int>(i));
  return out;
}

namespace detail {

inline std::vector<int> changed_atoms(const al::SymbolicState& a, const al::SymbolicState& b, std::size_t n) {
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i)
    if (a.holds(static_cast<int>(i)) != b.holds(static_cast<int>(i))) out.push_back(static_cast<int>(i));
  return out;
}

/// Translates one ground fine action into the skill-event vocabulary.
struct ActionView {
  Skill skill = Skill::Move;
  std::vector<std::string> args;
  std::optional<Thing> object;
  std::string place;
  std::optional<Connection> fastens;
};

inline Thing thing_of(const planner::RampModel& m, const std::string& constant) {
  auto it = m.beam_of_joint.find(constant);
  if (it != m.beam_of_joint.end()) return {ThingKind::Beam, it->second};
  for (const auto& b : m.movable_beams)
    if (b == constant) return {ThingKind::Beam, constant};
  return {ThingKind::Peg, constant};
}

inline ActionView view_of(const planner::RampModel& m, const al::GroundedDomain& g, int action) {
  ActionView v;
  const std::string pred = g.action_predicate(action);
  auto skill = skill_from_string(pred);
  if (!skill) throw Error(ErrorCode::SemanticError, "fine action " + g.action_name(action) + " is not a skill");
  v.skill = *skill;
  v.args = g.action_args(action);
  switch (v.skill) {
    case Skill::Move: v.place = v.args.at(1); break;
    case Skill::PickUp:
    case Skill::PutDown:
    case Skill::AssembleSquare:
    case Skill::AssembleCap:
    case Skill::Push: v.object = thing_of(m, v.args.at(1)); break;
    case Skill::Fasten:
      v.object = Thing{ThingKind::Peg, v.args.at(3)};
      v.fastens = m.connection_of_joints.at({v.args.at(1), v.args.at(2)});
      break;
  }
  return v;
}

}  // namespace detail

/// Runs `plan` once. Runtime failures become trace content; only an invalid
/// config raises (CONFIG_ERROR).
inline ExecutionTrace execute(const planner::PlanResult& plan, const GoalConfiguration& goal,
                              const io::LayoutTemplate& layout, const SimConfig& config,
                              const std::string& class_config_hash = {}) {
  validate(config);
  const al::GroundedDomain& g = *plan.fine.domain;
  const planner::RampModel& model = *plan.model;
  const std::size_t n = g.atom_count();
  const std::vector<int> actions = plan.fine.flattened();

  ExecutionTrace trace;
  trace.goal_id = goal.id;
  trace.seed = config.seed;
  trace.config_hash = class_config_hash.empty() ? config_hash(config) : class_config_hash;
  trace.plan_hash = plan_hash(plan);
  trace.planning_time_s = charged_planning_time(plan, config);
  trace.initial_state = io::initial_world_state(goal, layout, kStartPlace);

  // Nominal trajectory.
  std::vector<al::SymbolicState> nominal{plan.fine.init};
  for (int a : actions) nominal.push_back(al::successor(g, nominal.back(), a));

  WorldState world = trace.initial_state;
  al::SymbolicState actual = plan.fine.init;
  std::vector<char> valid(n, 1);
  double t = trace.planning_time_s;

  auto emit = [&](ExecutionEvent e) {
    try {
      world = apply_event(world, e);
    } catch (const Error& err) {
      throw std::logic_error("simulator produced an illegal event: " + std::string(err.what()));
    }
    trace.events.push_back(std::move(e));
  };

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int a = actions[i];
    const detail::ActionView view = detail::view_of(model, g, a);
    const SkillModel& m = config.model(view.skill);
    const al::SymbolicState& nominal_post = nominal[i + 1];
    const std::vector<int> nominal_delta = detail::changed_atoms(nominal[i], nominal_post, n);

    bool enabled = al::applicable(g, actual, a);
    if (enabled) {
      for (int x : influence_scope(g, a)) enabled = enabled && valid[static_cast<std::size_t>(x)];
    }

    auto base_event = [&](EventKind kind, int attempt) {
      ExecutionEvent e;
      e.t_s = t;
      e.kind = kind;
      e.skill = view.skill;
      e.args = view.args;
      e.attempt_index = attempt;
      e.object = view.object;
      e.place = view.place;
      return e;
    };

    if (!enabled && config.failure_propagation == FailurePropagation::Strict) {
      ExecutionEvent e = base_event(EventKind::SkillFailed, 0);
      e.note = "skipped: precondition";
      emit(std::move(e));
      for (int x : nominal_delta) valid[static_cast<std::size_t>(x)] = 0;
      continue;
    }

    const int attempts = 1 + m.retries;
    for (int k = 0; k < attempts; ++k) {
      const AttemptDraws d = draw_attempt(config.seed, i, static_cast<std::uint64_t>(k));
      const double duration =
          k == 0 ? m.base_duration_s + m.duration_jitter_s * (2.0 * d.duration - 1.0) : m.retry_duration_s;
      const double p = k == 0 ? m.success_prob : m.retry_success_prob;
      emit(base_event(EventKind::SkillStarted, k));
      t += duration;
      if (enabled && d.success < p) {
        const al::SymbolicState before = actual;
        actual = al::successor(g, actual, a);
        const std::vector<int> delta = detail::changed_atoms(before, actual, n);
        for (int x : delta) valid[static_cast<std::size_t>(x)] = 0;
        for (int x : nominal_delta)
          valid[static_cast<std::size_t>(x)] = actual.holds(x) == nominal_post.holds(x) ? 1 : 0;

        ExecutionEvent e = base_event(EventKind::SkillSucceeded, k);
        if (view.skill == Skill::AssembleSquare || view.skill == Skill::AssembleCap) {
          for (const auto& c : goal.connections) {
            const auto joined = g.find_atom("joined(" + planner::joint_constant(c.joint_a) + "," +
                                           planner::joint_constant(c.joint_b) + ")");
            if (joined && actual.holds(*joined) && !before.holds(*joined)) e.connections.push_back(c);
          }
        }
        emit(std::move(e));
        if (view.fastens) {
          ExecutionEvent ins = base_event(EventKind::PegInserted, k);
          ins.connections = {*view.fastens};
          emit(std::move(ins));
        }
        break;
      }
      if (k + 1 < attempts) continue;
      ExecutionEvent e = base_event(EventKind::SkillFailed, k);
      if (!enabled) e.note = "precondition";
      emit(std::move(e));
      for (int x : nominal_delta) valid[static_cast<std::size_t>(x)] = 0;
      if (enabled && view.skill == Skill::Fasten && d.drop < config.peg_drop_prob) {
        const std::string& peg = view.args.at(3);
        const auto drop = g.find_action("drop(" + view.args.at(0) + "," + peg + ")");
        if (!drop) throw std::logic_error("fine domain has no drop action for " + peg);
        const al::SymbolicState before = actual;
        actual = al::forced_successor(g, actual, *drop);
        std::set<int> nominal_set(nominal_delta.begin(), nominal_delta.end());
        for (int x : detail::changed_atoms(before, actual, n)) {
          valid[static_cast<std::size_t>(x)] =
              nominal_set.count(x) && actual.holds(x) == nominal_post.holds(x) ? 1 : 0;
        }
        ExecutionEvent dropped;
        dropped.t_s = t;
        dropped.kind = EventKind::PegDropped;
        dropped.object = Thing{ThingKind::Peg, peg};
        emit(std::move(dropped));
      }
    }
  }

  ExecutionEvent end;
  end.t_s = t;
  end.kind = EventKind::RunEnded;
  emit(std::move(end));
  trace.final_state = world;
  return trace;
}

}  // namespace ramp::sim
