#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/al/grounding.hpp"
#include "ramp/error.hpp"

namespace ramp::al {

/// A complete state: bit i set means fluent atom i holds, clear means its
/// negation holds.
struct SymbolicState {
  std::vector<std::uint64_t> bits;

  SymbolicState() = default;
  explicit SymbolicState(std::size_t atoms) : bits((atoms + 63) / 64, 0) {}

  bool holds(int atom) const {
    return (bits[static_cast<std::size_t>(atom) >> 6] >> (atom & 63)) & 1U;
  }
  bool holds_lit(Lit l) const { return holds(lit_atom(l)) != lit_negated(l); }
  void set(int atom, bool value) {
    auto& w = bits[static_cast<std::size_t>(atom) >> 6];
    const std::uint64_t mask = std::uint64_t{1} << (atom & 63);
    w = value ? (w | mask) : (w & ~mask);
  }
  std::size_t true_count() const {
    std::size_t n = 0;
    for (auto w : bits) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;
};

struct SymbolicStateHash {
  std::size_t operator()(const SymbolicState& s) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto w : s.bits) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

inline bool body_holds(const SymbolicState& s, const std::vector<Lit>& body) {
  for (Lit l : body)
    if (!s.holds_lit(l)) return false;
  return true;
}

/// Names of the atoms that hold, in atom order.
inline std::vector<std::string> true_atoms(const GroundedDomain& g, const SymbolicState& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.atom_count(); ++i)
    if (s.holds(static_cast<int>(i))) out.push_back(g.fluent_atoms[i].name);
  return out;
}

/// Set of literals over the domain's atoms, indexed by Lit.
class LiteralSet {
 public:
  explicit LiteralSet(std::size_t atoms) : bits_((atoms * 2 + 63) / 64, 0) {}

  bool contains(Lit l) const { return (bits_[static_cast<std::size_t>(l) >> 6] >> (l & 63)) & 1U; }
  bool insert(Lit l) {
    auto& w = bits_[static_cast<std::size_t>(l) >> 6];
    const std::uint64_t mask = std::uint64_t{1} << (l & 63);
    if (w & mask) return false;
    w |= mask;
    return true;
  }
  void erase(Lit l) { bits_[static_cast<std::size_t>(l) >> 6] &= ~(std::uint64_t{1} << (l & 63)); }

 private:
  std::vector<std::uint64_t> bits_;
};

/// Smallest superset of `seed` closed under the state constraints.
inline LiteralSet closure(const GroundedDomain& g, const std::vector<Lit>& seed) {
  LiteralSet set(g.atom_count());
  std::vector<Lit> queue;
  auto add = [&](Lit l) {
    if (set.insert(l)) queue.push_back(l);
  };
  for (int c : g.unconditional_constraints) add(g.constraints[static_cast<std::size_t>(c)].head);
  for (Lit l : seed) add(l);
  while (!queue.empty()) {
    Lit l = queue.back();
    queue.pop_back();
    for (int ci : g.constraints_by_body_lit[static_cast<std::size_t>(l)]) {
      const auto& c = g.constraints[static_cast<std::size_t>(ci)];
      if (set.contains(c.head)) continue;
      bool fires = true;
      for (Lit b : c.body) {
        if (!set.contains(b)) {
          fires = false;
          break;
        }
      }
      if (fires) add(c.head);
    }
  }
  return set;
}

/// True when every state constraint whose body holds in `s` has its head
/// holding as well.
inline bool is_closed(const GroundedDomain& g, const SymbolicState& s) {
  for (const auto& c : g.constraints)
    if (body_holds(s, c.body) && !s.holds_lit(c.head)) return false;
  return true;
}

inline bool applicable(const GroundedDomain& g, const SymbolicState& s, int action) {
  const auto a = static_cast<std::size_t>(action);
  if (g.never_applicable[a]) return false;
  for (int ei : g.exec_by_action[a])
    if (body_holds(s, g.executability[static_cast<std::size_t>(ei)].body)) return false;
  return true;
}

/// Direct effects of `action` in `s`: heads of the causal laws that fire.
inline std::vector<Lit> direct_effects(const GroundedDomain& g, const SymbolicState& s, int action) {
  std::vector<Lit> out;
  for (int li : g.causal_by_action[static_cast<std::size_t>(action)]) {
    const auto& law = g.causal_laws[static_cast<std::size_t>(li)];
    if (body_holds(s, law.body)) out.push_back(law.head);
  }
  return out;
}

/// Successor of `s` under `action`: direct effects, closed under the state
/// constraints, with every other literal kept by inertia unless the
/// constraints force it to change. NOT_APPLICABLE when an executability
/// condition blocks the action, INCONSISTENT when effects contradict,
/// AMBIGUOUS_CLOSURE when no unique complete successor is determined.
inline SymbolicState forced_successor(const GroundedDomain& g, const SymbolicState& s, int action);

inline SymbolicState successor(const GroundedDomain& g, const SymbolicState& s, int action) {
  if (!applicable(g, s, action))
    throw Error(ErrorCode::NotApplicable, g.action_name(action) + " is not executable here");
  return forced_successor(g, s, action);
}

/// Same transition, ignoring executability conditions. Used for exogenous
/// actions such as a peg slipping out of the gripper.
inline SymbolicState forced_successor(const GroundedDomain& g, const SymbolicState& s, int action) {
  const std::size_t n = g.atom_count();
  std::vector<Lit> effects = direct_effects(g, s, action);
  LiteralSet effect_set(n);
  for (Lit l : effects) effect_set.insert(l);
  for (Lit l : effects)
    if (effect_set.contains(negate(l)))
      throw Error(ErrorCode::Inconsistent,
                  g.action_name(action) + " causes both " + g.literal_name(l) + " and its negation");

  // Inertial literals: everything in s not overridden by a direct effect.
  std::vector<bool> kept(n, true);
  for (Lit l : effects) kept[static_cast<std::size_t>(lit_atom(l))] = false;

  auto current_lit = [&](std::size_t atom) { return make_lit(static_cast<int>(atom), !s.holds(static_cast<int>(atom))); };

  for (std::size_t round = 0; round <= n; ++round) {
    std::vector<Lit> seed = effects;
    for (std::size_t a = 0; a < n; ++a)
      if (kept[a]) seed.push_back(current_lit(a));
    LiteralSet c = closure(g, seed);
    bool conflict = false;
    bool dropped = false;
    for (std::size_t a = 0; a < n; ++a) {
      const Lit pos = make_lit(static_cast<int>(a), false);
      if (c.contains(pos) && c.contains(negate(pos))) {
        conflict = true;
        if (kept[a]) {
          kept[a] = false;
          dropped = true;
        }
      }
    }
    if (!conflict) {
      SymbolicState next(n);
      for (std::size_t a = 0; a < n; ++a) {
        const Lit pos = make_lit(static_cast<int>(a), false);
        const bool t = c.contains(pos);
        if (!t && !c.contains(negate(pos)))
          throw Error(ErrorCode::AmbiguousClosure, g.action_name(action) + " leaves " +
                                                       g.fluent_atoms[a].name + " undetermined");
        next.set(static_cast<int>(a), t);
      }
      // Fixpoint check: the result must be exactly the closure of the
      // effects plus whatever of s survives into it.
      std::vector<Lit> check = effects;
      for (std::size_t a = 0; a < n; ++a)
        if (next.holds(static_cast<int>(a)) == s.holds(static_cast<int>(a))) check.push_back(current_lit(a));
      LiteralSet again = closure(g, check);
      for (std::size_t a = 0; a < n; ++a) {
        const Lit mine = make_lit(static_cast<int>(a), !next.holds(static_cast<int>(a)));
        if (!again.contains(mine) || again.contains(negate(mine)))
          throw Error(ErrorCode::AmbiguousClosure,
                      g.action_name(action) + " has no well-founded successor at " + g.fluent_atoms[a].name);
      }
      return next;
    }
    if (!dropped)
      throw Error(ErrorCode::Inconsistent,
                  "effects of " + g.action_name(action) + " contradict the state constraints");
  }
  throw Error(ErrorCode::Inconsistent, "effects of " + g.action_name(action) + " do not settle");
}

/// Builds a state from the given literals; atoms not mentioned default to
/// false and derived atoms are added by closure. INVALID_INIT when the
/// literals contradict each other or the result violates a constraint.
inline SymbolicState make_state(const GroundedDomain& g, const std::vector<std::string>& literals) {
  const std::size_t n = g.atom_count();
  std::vector<Lit> seed;
  for (const auto& text : literals) {
    try {
      seed.push_back(g.literal(text));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidInit, e.message());
    }
  }
  LiteralSet c = closure(g, seed);
  SymbolicState s(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Lit pos = make_lit(static_cast<int>(a), false);
    if (c.contains(pos) && c.contains(negate(pos)))
      throw Error(ErrorCode::InvalidInit, "initial literals force both " + g.fluent_atoms[a].name + " and its negation");
    s.set(static_cast<int>(a), c.contains(pos));
  }
  if (!is_closed(g, s)) {
    for (const auto& con : g.constraints) {
      if (body_holds(s, con.body) && !s.holds_lit(con.head))
        throw Error(ErrorCode::InvalidInit, "initial state violates a constraint with head " + g.literal_name(con.head));
    }
  }
  return s;
}

/// Ground actions executable in `s`, in name order.
inline std::vector<int> applicable_actions(const GroundedDomain& g, const SymbolicState& s) {
  std::vector<int> out;
  for (std::size_t a = 0; a < g.actions.size(); ++a)
    if (applicable(g, s, static_cast<int>(a))) out.push_back(static_cast<int>(a));
  return out;
}

}  // namespace ramp::al
