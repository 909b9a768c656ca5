#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ramp/al/grounding.hpp"
#include "ramp/al/semantics.hpp"
#include "ramp/error.hpp"

namespace ramp::planner {

using al::GroundedDomain;
using al::Lit;
using al::SymbolicState;

struct SearchStats {
  std::size_t nodes_expanded = 0;
  int horizon_searched = 0;
};

/// Initial observations and static facts. Statics live in the grounded
/// domain; the history here only carries step-0 fluent literals.
struct History {
  std::vector<std::string> init;
};

struct CoarseStep {
  int action = 0;
  SymbolicState pre;
  SymbolicState post;
};

struct CoarsePlan {
  std::vector<CoarseStep> steps;
  SearchStats stats;

  std::size_t horizon() const { return steps.size(); }
  std::vector<std::string> action_names(const GroundedDomain& g) const {
    std::vector<std::string> out;
    for (const auto& s : steps) out.push_back(g.action_name(s.action));
    return out;
  }
};

inline std::vector<Lit> goal_literals(const GroundedDomain& g, const std::vector<std::string>& goal) {
  std::vector<Lit> out;
  for (const auto& text : goal) out.push_back(g.literal(text));
  return out;
}

inline bool satisfies(const SymbolicState& s, const std::vector<Lit>& goal) { return al::body_holds(s, goal); }

/// Over-approximates the literals that can hold in any reachable state.
/// An executability condition only blocks an action when none of its body
/// literals can ever become false.
inline al::LiteralSet relaxed_reachable(const GroundedDomain& g, const SymbolicState& init) {
  const std::size_t n = g.atom_count();
  std::vector<Lit> seed;
  for (std::size_t a = 0; a < n; ++a) seed.push_back(al::make_lit(static_cast<int>(a), !init.holds(static_cast<int>(a))));
  std::vector<bool> reached(n * 2, false);
  for (Lit l : seed) reached[static_cast<std::size_t>(l)] = true;
  auto has = [&](Lit l) { return reached[static_cast<std::size_t>(l)]; };
  bool changed = true;
  while (changed) {
    changed = false;
    auto add = [&](Lit l) {
      if (!reached[static_cast<std::size_t>(l)]) {
        reached[static_cast<std::size_t>(l)] = true;
        changed = true;
      }
    };
    for (std::size_t a = 0; a < g.actions.size(); ++a) {
      if (g.never_applicable[a]) continue;
      bool blocked = false;
      for (int ei : g.exec_by_action[a]) {
        bool can_lift = false;
        for (Lit l : g.executability[static_cast<std::size_t>(ei)].body)
          if (has(al::negate(l))) can_lift = true;
        if (!can_lift) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      for (int li : g.causal_by_action[a]) {
        const auto& law = g.causal_laws[static_cast<std::size_t>(li)];
        bool fires = true;
        for (Lit l : law.body) fires = fires && has(l);
        if (fires) add(law.head);
      }
    }
    for (const auto& c : g.constraints) {
      bool fires = true;
      for (Lit l : c.body) fires = fires && has(l);
      if (fires) add(c.head);
    }
  }
  al::LiteralSet out(n);
  for (std::size_t l = 0; l < reached.size(); ++l)
    if (reached[l]) out.insert(static_cast<Lit>(l));
  return out;
}

/// Actions that can influence the goal: those with a direct effect on an
/// atom in the goal's cone of influence. The cone starts at the goal atoms
/// and grows through constraint bodies, causal-law bodies and the
/// executability conditions of relevant actions.
inline std::vector<int> relevant_actions(const GroundedDomain& g, const std::vector<Lit>& goal) {
  const std::size_t n = g.atom_count();
  std::vector<bool> atom_rel(n, false), action_rel(g.actions.size(), false);
  std::vector<int> queue;
  auto mark = [&](int atom) {
    if (!atom_rel[static_cast<std::size_t>(atom)]) {
      atom_rel[static_cast<std::size_t>(atom)] = true;
      queue.push_back(atom);
    }
  };
  for (Lit l : goal) mark(al::lit_atom(l));
  // Reverse indexes: which constraints and causal laws write each atom.
  std::vector<std::vector<int>> constraints_by_head(n), laws_by_head(n);
  for (std::size_t i = 0; i < g.constraints.size(); ++i)
    constraints_by_head[static_cast<std::size_t>(al::lit_atom(g.constraints[i].head))].push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < g.causal_laws.size(); ++i)
    laws_by_head[static_cast<std::size_t>(al::lit_atom(g.causal_laws[i].head))].push_back(static_cast<int>(i));
  while (!queue.empty()) {
    int atom = queue.back();
    queue.pop_back();
    for (int ci : constraints_by_head[static_cast<std::size_t>(atom)])
      for (Lit l : g.constraints[static_cast<std::size_t>(ci)].body) mark(al::lit_atom(l));
    for (int li : laws_by_head[static_cast<std::size_t>(atom)]) {
      const auto& law = g.causal_laws[static_cast<std::size_t>(li)];
      for (Lit l : law.body) mark(al::lit_atom(l));
      const auto a = static_cast<std::size_t>(law.action);
      if (!action_rel[a]) {
        action_rel[a] = true;
        for (int ei : g.exec_by_action[a])
          for (Lit l : g.executability[static_cast<std::size_t>(ei)].body) mark(al::lit_atom(l));
      }
    }
  }
  std::vector<int> out;
  for (std::size_t a = 0; a < g.actions.size(); ++a)
    if (action_rel[a] && !g.never_applicable[a]) out.push_back(static_cast<int>(a));
  return out;
}

/// Depth-bounded search for a shortest action sequence reaching `is_goal`.
/// Children are tried in the order of `actions` (name order), so the first
/// plan found is the lexicographically smallest among the shortest ones.
class IterativeDeepening {
 public:
  using GoalTest = std::function<bool(const SymbolicState&)>;

  IterativeDeepening(const GroundedDomain& g, std::vector<int> actions, GoalTest is_goal)
      : g_(g), actions_(std::move(actions)), is_goal_(std::move(is_goal)) {}

  /// Returns the plan, or nullopt. `exhausted` is set when the whole
  /// reachable space was explored without reaching the goal.
  std::optional<std::vector<int>> run(const SymbolicState& init, int max_horizon, SearchStats& stats,
                                      bool& exhausted) {
    exhausted = false;
    for (int limit = 0; limit <= max_horizon; ++limit) {
      stats.horizon_searched = limit;
      seen_.clear();
      cutoff_ = false;
      path_.clear();
      if (dfs(init, 0, limit, stats)) return path_;
      if (!cutoff_) {
        exhausted = true;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

 private:
  using Children = std::vector<std::pair<int, SymbolicState>>;

  const Children& children(const SymbolicState& s, SearchStats& stats) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    ++stats.nodes_expanded;
    Children out;
    for (int a : actions_) {
      if (!al::applicable(g_, s, a)) continue;
      out.emplace_back(a, al::successor(g_, s, a));
    }
    if (cache_.size() >= kCacheLimit) cache_.clear();
    return cache_.emplace(s, std::move(out)).first->second;
  }

  bool dfs(const SymbolicState& s, int depth, int limit, SearchStats& stats) {
    if (is_goal_(s)) return true;
    if (depth == limit) {
      cutoff_ = true;
      return false;
    }
    auto [it, inserted] = seen_.emplace(s, depth);
    if (!inserted) {
      if (it->second <= depth) return false;
      it->second = depth;
    }
    // Copy: the cache may be cleared while recursing.
    Children kids = children(s, stats);
    for (auto& [a, next] : kids) {
      path_.push_back(a);
      if (dfs(next, depth + 1, limit, stats)) return true;
      path_.pop_back();
    }
    return false;
  }

  static constexpr std::size_t kCacheLimit = 200000;

  const GroundedDomain& g_;
  std::vector<int> actions_;
  GoalTest is_goal_;
  std::unordered_map<SymbolicState, int, al::SymbolicStateHash> seen_;
  std::unordered_map<SymbolicState, Children, al::SymbolicStateHash> cache_;
  std::vector<int> path_;
  bool cutoff_ = false;
};

inline constexpr int kDefaultCoarseHorizon = 40;
inline constexpr int kDefaultFineHorizon = 10;

/// Shortest coarse plan from the history's initial state to the goal, ties
/// broken lexicographically by ground action name. NO_PLAN when the goal is
/// unreachable within `max_horizon`.
inline CoarsePlan plan_coarse(const GroundedDomain& g, const History& history, const std::vector<std::string>& goal,
                              int max_horizon = kDefaultCoarseHorizon) {
  if (max_horizon < 0) throw Error(ErrorCode::NoPlan, "negative horizon");
  SymbolicState init = al::make_state(g, history.init);
  // A goal over objects the instance lacks is unreachable, not malformed.
  for (const auto& text : goal) {
    const std::string atom = !text.empty() && text.front() == '-' ? text.substr(1) : text;
    if (g.find_atom(atom)) continue;
    const std::string prefix = atom.substr(0, atom.find('(') + 1);
    const bool known_fluent = std::any_of(g.fluent_atoms.begin(), g.fluent_atoms.end(),
                                          [&](const al::GroundAtom& a) { return a.name.rfind(prefix, 0) == 0; });
    if (known_fluent)
      throw Error(ErrorCode::NoPlan, "goal literal " + text + " names an object outside the instance (searched horizon " +
                                         std::to_string(max_horizon) + ")");
  }
  std::vector<Lit> goal_lits = goal_literals(g, goal);
  CoarsePlan plan;
  if (satisfies(init, goal_lits)) return plan;

  al::LiteralSet reach = relaxed_reachable(g, init);
  for (Lit l : goal_lits) {
    if (!reach.contains(l)) {
      plan.stats.horizon_searched = max_horizon;
      throw Error(ErrorCode::NoPlan, "goal literal " + g.literal_name(l) + " is unreachable (searched horizon " +
                                         std::to_string(max_horizon) + ")");
    }
  }

  IterativeDeepening search(g, relevant_actions(g, goal_lits),
                            [&](const SymbolicState& s) { return satisfies(s, goal_lits); });
  bool exhausted = false;
  auto found = search.run(init, max_horizon, plan.stats, exhausted);
  if (!found)
    throw Error(ErrorCode::NoPlan, "no plan within horizon " + std::to_string(exhausted ? plan.stats.horizon_searched : max_horizon));
  SymbolicState cur = init;
  for (int a : *found) {
    SymbolicState next = al::successor(g, cur, a);
    plan.steps.push_back({a, cur, next});
    cur = std::move(next);
  }
  return plan;
}

/// Exact minimal plan length by breadth-first search over every ground
/// action. Independent of the pruning used by plan_coarse; used as a test
/// oracle. STATE_SPACE_TOO_LARGE beyond `max_states`.
inline std::optional<int> bfs_oracle(const GroundedDomain& g, const SymbolicState& init, const std::vector<Lit>& goal,
                                     std::size_t max_states = 1000000) {
  if (satisfies(init, goal)) return 0;
  std::unordered_map<SymbolicState, int, al::SymbolicStateHash> depth{{init, 0}};
  std::deque<SymbolicState> frontier{init};
  while (!frontier.empty()) {
    SymbolicState s = std::move(frontier.front());
    frontier.pop_front();
    const int d = depth.at(s);
    for (std::size_t a = 0; a < g.actions.size(); ++a) {
      if (!al::applicable(g, s, static_cast<int>(a))) continue;
      SymbolicState next = al::successor(g, s, static_cast<int>(a));
      if (depth.count(next)) continue;
      if (satisfies(next, goal)) return d + 1;
      depth.emplace(next, d + 1);
      if (depth.size() > max_states)
        throw Error(ErrorCode::StateSpaceTooLarge, "more than " + std::to_string(max_states) + " reachable states");
      frontier.push_back(std::move(next));
    }
  }
  return std::nullopt;
}

}  // namespace ramp::planner
