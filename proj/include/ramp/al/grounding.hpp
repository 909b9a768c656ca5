#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ramp/al/description.hpp"
#include "ramp/error.hpp"

namespace ramp::al {

/// Sort memberships and static facts for one problem instance. Constants
/// given for a sort replace any constants the description declares for it.
struct DomainInstance {
  std::map<std::string, std::vector<std::string>> constants;
  std::vector<std::string> static_facts;  // ground atoms, e.g. "next_to(a,b)"
};

struct GroundOptions {
  /// Zoomed groundings may leave sorts empty and carry facts about
  /// constants outside the restricted universe.
  bool allow_empty_sorts = false;
  bool ignore_foreign_facts = false;
};

/// Ground literal: atom index * 2, plus 1 when negated.
using Lit = std::int32_t;

constexpr Lit make_lit(int atom, bool negated) { return atom * 2 + (negated ? 1 : 0); }
constexpr int lit_atom(Lit l) { return l >> 1; }
constexpr bool lit_negated(Lit l) { return (l & 1) != 0; }
constexpr Lit negate(Lit l) { return l ^ 1; }

struct GroundAtom {
  int predicate = 0;  // index into the description's statics or fluents
  std::vector<int> args;
  std::string name;
};

struct GroundAction {
  int predicate = 0;  // index into the description's actions
  std::vector<int> args;
  std::string name;
};

struct GroundCausalLaw {
  int action = 0;
  Lit head = 0;
  std::vector<Lit> body;
};

struct GroundConstraint {
  Lit head = 0;
  std::vector<Lit> body;
};

struct GroundExecutability {
  int action = 0;
  std::vector<Lit> body;
};

/// Ground atom text "p(a,b)" split into predicate and arguments.
struct GroundAtomText {
  std::string predicate;
  std::vector<std::string> args;
};

inline GroundAtomText split_ground_atom(std::string_view text) {
  GroundAtomText out;
  auto open = text.find('(');
  if (open == std::string_view::npos) {
    out.predicate = std::string(text);
    return out;
  }
  if (text.back() != ')') throw Error(ErrorCode::ParseError, "malformed ground atom '" + std::string(text) + "'");
  out.predicate = std::string(text.substr(0, open));
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  std::size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string_view arg = inner.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!arg.empty() && arg.front() == ' ') arg.remove_prefix(1);
    while (!arg.empty() && arg.back() == ' ') arg.remove_suffix(1);
    if (arg.empty()) throw Error(ErrorCode::ParseError, "malformed ground atom '" + std::string(text) + "'");
    out.args.emplace_back(arg);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string ground_name(const std::string& predicate, const std::vector<int>& args,
                               const std::vector<std::string>& constants) {
  std::string s = predicate;
  if (!args.empty()) {
    s += "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ",";
      s += constants[static_cast<std::size_t>(args[i])];
    }
    s += ")";
  }
  return s;
}

/// A fully grounded system description. Immutable once built.
class GroundedDomain {
 public:
  std::shared_ptr<const SystemDescription> description;
  std::vector<std::string> constants;                    // global constant table, sorted
  std::map<std::string, std::vector<int>> sort_members;  // sort -> constant ids
  std::vector<GroundAtom> fluent_atoms;
  std::vector<GroundAtom> static_atoms;
  std::vector<bool> static_truth;
  std::vector<GroundAction> actions;  // sorted by name
  std::vector<GroundCausalLaw> causal_laws;
  std::vector<GroundConstraint> constraints;
  std::vector<GroundExecutability> executability;

  // Indexes.
  std::vector<std::vector<int>> causal_by_action;
  std::vector<std::vector<int>> exec_by_action;
  std::vector<std::vector<int>> constraints_by_body_lit;  // indexed by Lit
  std::vector<int> unconditional_constraints;
  std::vector<bool> never_applicable;
  std::unordered_map<std::string, int> atom_index;
  std::unordered_map<std::string, int> static_index;
  std::unordered_map<std::string, int> action_index;
  std::unordered_map<std::string, int> constant_index;

  std::size_t atom_count() const { return fluent_atoms.size(); }
  std::size_t words() const { return (fluent_atoms.size() + 63) / 64; }

  std::optional<int> find_atom(std::string_view name) const {
    auto it = atom_index.find(std::string(name));
    if (it == atom_index.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> find_action(std::string_view name) const {
    auto it = action_index.find(std::string(name));
    if (it == action_index.end()) return std::nullopt;
    return it->second;
  }
  bool static_holds(std::string_view name) const {
    auto it = static_index.find(std::string(name));
    return it != static_index.end() && static_truth[static_cast<std::size_t>(it->second)];
  }

  /// Parses "f(a,b)" or "-f(a,b)" into a ground fluent literal.
  Lit literal(std::string_view text) const {
    bool neg = !text.empty() && text.front() == '-';
    if (neg) text.remove_prefix(1);
    auto atom = find_atom(text);
    if (!atom) throw Error(ErrorCode::UndeclaredSymbol, "unknown ground fluent '" + std::string(text) + "'");
    return make_lit(*atom, neg);
  }

  std::string literal_name(Lit l) const {
    return (lit_negated(l) ? "-" : "") + fluent_atoms[static_cast<std::size_t>(lit_atom(l))].name;
  }

  const std::string& action_name(int a) const { return actions[static_cast<std::size_t>(a)].name; }
  const std::string& action_predicate(int a) const {
    return description->actions[static_cast<std::size_t>(actions[static_cast<std::size_t>(a)].predicate)].name;
  }
  std::vector<std::string> action_args(int a) const {
    std::vector<std::string> out;
    for (int c : actions[static_cast<std::size_t>(a)].args) out.push_back(constants[static_cast<std::size_t>(c)]);
    return out;
  }
  std::vector<std::string> members(std::string_view sort) const {
    std::vector<std::string> out;
    auto it = sort_members.find(std::string(sort));
    if (it == sort_members.end()) return out;
    for (int c : it->second) out.push_back(constants[static_cast<std::size_t>(c)]);
    return out;
  }
};

namespace detail {

// Mixed-radix layout of one predicate's ground instances.
struct PredicateTable {
  int offset = 0;
  std::size_t count = 1;
  std::vector<std::size_t> strides;
  std::vector<const std::vector<int>*> positions;  // constant id -> position in arg sort, or -1
  std::vector<const std::vector<int>*> members;

  /// Local index of a ground instance, or -1 when an argument is not a
  /// member of its sort in this grounding.
  long index(const std::vector<int>& args) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      int p = (*positions[i])[static_cast<std::size_t>(args[i])];
      if (p < 0) return -1;
      idx += static_cast<std::size_t>(p) * strides[i];
    }
    return static_cast<long>(idx);
  }
};

struct Grounder {
  const SystemDescription& d;
  GroundedDomain& g;
  std::map<std::string, std::vector<int>> positions;  // sort -> (constant -> pos)
  std::vector<PredicateTable> statics, fluents, actions;
  std::vector<int> action_remap;  // enumeration order -> sorted id

  PredicateTable table(const PredicateDecl& p, int offset) {
    PredicateTable t;
    t.offset = offset;
    t.strides.assign(p.arg_sorts.size(), 1);
    for (std::size_t i = p.arg_sorts.size(); i-- > 0;) {
      const auto& mem = g.sort_members.at(p.arg_sorts[i]);
      t.strides[i] = t.count;
      t.count *= mem.size();
    }
    for (const auto& s : p.arg_sorts) {
      t.positions.push_back(&positions.at(s));
      t.members.push_back(&g.sort_members.at(s));
    }
    return t;
  }

  // Enumerates every argument tuple of a predicate in row-major order.
  template <typename F>
  static void for_each_tuple(const PredicateTable& t, F&& f) {
    std::vector<int> args(t.members.size());
    if (t.count == 0) return;
    std::vector<std::size_t> idx(t.members.size(), 0);
    for (std::size_t n = 0; n < t.count; ++n) {
      for (std::size_t i = 0; i < idx.size(); ++i) args[i] = (*t.members[i])[idx[i]];
      f(args);
      for (std::size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] < t.members[i]->size()) break;
        idx[i] = 0;
      }
    }
  }

  int role_index(const std::vector<PredicateDecl>& group, std::string_view name) {
    for (std::size_t i = 0; i < group.size(); ++i)
      if (group[i].name == name) return static_cast<int>(i);
    return -1;
  }

  // A literal inside an axiom, resolved against the predicate tables.
  struct Slot {
    Role role = Role::Fluent;
    int predicate = 0;
    bool negated = false;
    std::vector<int> var;        // variable index per argument, or -1
    std::vector<int> constant;   // constant id when var == -1
  };

  Slot slot(const Atom& a, bool negated, const std::map<std::string, int>& var_ids) {
    Slot s;
    s.negated = negated;
    const PredicateDecl* p = d.predicate(a.predicate);
    s.role = p->role;
    const auto& group = p->role == Role::Static ? d.statics : p->role == Role::Fluent ? d.fluents : d.actions;
    s.predicate = role_index(group, a.predicate);
    for (const auto& t : a.args) {
      if (t.variable) {
        s.var.push_back(var_ids.at(t.name));
        s.constant.push_back(-1);
      } else {
        s.var.push_back(-1);
        s.constant.push_back(g.constant_index.at(t.name));
      }
    }
    return s;
  }

  std::vector<int> bind(const Slot& s, const std::vector<int>& assignment) const {
    std::vector<int> args(s.var.size());
    for (std::size_t i = 0; i < s.var.size(); ++i)
      args[i] = s.var[i] >= 0 ? assignment[static_cast<std::size_t>(s.var[i])] : s.constant[i];
    return args;
  }

  // Fluent literal id, or nullopt when the atom lies outside the grounding.
  std::optional<Lit> fluent_lit(const Slot& s, const std::vector<int>& assignment) const {
    const auto& t = fluents[static_cast<std::size_t>(s.predicate)];
    long local = t.index(bind(s, assignment));
    if (local < 0) return std::nullopt;
    return make_lit(t.offset + static_cast<int>(local), s.negated);
  }

  bool static_value(const Slot& s, const std::vector<int>& assignment) const {
    const auto& t = statics[static_cast<std::size_t>(s.predicate)];
    long local = t.index(bind(s, assignment));
    bool truth = local >= 0 && g.static_truth[static_cast<std::size_t>(t.offset + local)];
    return s.negated ? !truth : truth;
  }

  void ground_axiom(const Axiom& ax) {
    // Variable order: trigger, static body literals, guards, then the rest,
    // so static filters prune as early as possible.
    std::vector<std::string> order;
    auto note = [&](const Atom& a) {
      for (const auto& t : a.args)
        if (t.variable && std::find(order.begin(), order.end(), t.name) == order.end()) order.push_back(t.name);
    };
    if (ax.trigger) note(*ax.trigger);
    for (const auto& l : ax.body)
      if (d.predicate(l.atom.predicate)->role == Role::Static) note(l.atom);
    for (const auto& l : ax.body) note(l.atom);
    if (ax.head) note(ax.head->atom);
    std::map<std::string, int> var_ids;
    for (std::size_t i = 0; i < order.size(); ++i) var_ids[order[i]] = static_cast<int>(i);

    std::vector<const std::vector<int>*> domains;
    for (const auto& v : order) domains.push_back(&g.sort_members.at(ax.variable_sorts.at(v)));

    auto level_of = [&](const std::vector<int>& vars) {
      int lvl = -1;
      for (int v : vars) lvl = std::max(lvl, v);
      return lvl;
    };

    // Static literals and guards are checked at the level where their last
    // variable is bound.
    std::vector<std::vector<Slot>> static_checks(order.size() + 1);
    std::vector<Slot> fluent_body;
    for (const auto& l : ax.body) {
      Slot s = slot(l.atom, l.negated, var_ids);
      if (s.role == Role::Static) static_checks[static_cast<std::size_t>(level_of(s.var) + 1)].push_back(std::move(s));
      else fluent_body.push_back(std::move(s));
    }
    struct GuardSlot {
      int lhs_var, rhs_var, lhs_const, rhs_const;
      bool equal;
    };
    std::vector<std::vector<GuardSlot>> guard_checks(order.size() + 1);
    for (const auto& gd : ax.guards) {
      GuardSlot gs{-1, -1, -1, -1, gd.equal};
      if (gd.lhs.variable) gs.lhs_var = var_ids.at(gd.lhs.name);
      else gs.lhs_const = g.constant_index.at(gd.lhs.name);
      if (gd.rhs.variable) gs.rhs_var = var_ids.at(gd.rhs.name);
      else gs.rhs_const = g.constant_index.at(gd.rhs.name);
      guard_checks[static_cast<std::size_t>(std::max(gs.lhs_var, gs.rhs_var) + 1)].push_back(gs);
    }
    std::optional<Slot> head, trigger;
    if (ax.head) head = slot(ax.head->atom, ax.head->negated, var_ids);
    if (ax.trigger) trigger = slot(*ax.trigger, false, var_ids);

    std::vector<int> assignment(order.size(), -1);
    auto checks_pass = [&](std::size_t level) {
      for (const auto& s : static_checks[level])
        if (!static_value(s, assignment)) return false;
      for (const auto& gs : guard_checks[level]) {
        int l = gs.lhs_var >= 0 ? assignment[static_cast<std::size_t>(gs.lhs_var)] : gs.lhs_const;
        int r = gs.rhs_var >= 0 ? assignment[static_cast<std::size_t>(gs.rhs_var)] : gs.rhs_const;
        if ((l == r) != gs.equal) return false;
      }
      return true;
    };

    auto emit = [&] {
      std::vector<Lit> body;
      for (const auto& s : fluent_body) {
        auto lit = fluent_lit(s, assignment);
        if (!lit) {
          // Atom outside this grounding is false: a positive literal fails,
          // a negative one holds trivially.
          if (!s.negated) return;
          continue;
        }
        body.push_back(*lit);
      }
      std::sort(body.begin(), body.end());
      body.erase(std::unique(body.begin(), body.end()), body.end());
      for (std::size_t i = 0; i + 1 < body.size(); ++i)
        if (body[i + 1] == negate(body[i])) return;  // contradictory body never fires
      int action = -1;
      if (trigger) {
        long local = actions[static_cast<std::size_t>(trigger->predicate)].index(bind(*trigger, assignment));
        if (local < 0) return;
        action = action_remap[static_cast<std::size_t>(actions[static_cast<std::size_t>(trigger->predicate)].offset + local)];
      }
      switch (ax.kind) {
        case AxiomKind::CausalLaw: {
          auto h = fluent_lit(*head, assignment);
          if (!h) return;
          g.causal_laws.push_back({action, *h, std::move(body)});
          break;
        }
        case AxiomKind::StateConstraint: {
          auto h = fluent_lit(*head, assignment);
          if (!h) return;
          g.constraints.push_back({*h, std::move(body)});
          break;
        }
        case AxiomKind::Executability:
          g.executability.push_back({action, std::move(body)});
          break;
      }
    };

    if (!checks_pass(0)) return;
    // Iterative backtracking over the variable domains.
    std::vector<std::size_t> cursor(order.size(), 0);
    std::size_t level = 0;
    if (order.empty()) {
      emit();
      return;
    }
    while (true) {
      const auto& dom = *domains[level];
      if (cursor[level] >= dom.size()) {
        cursor[level] = 0;
        if (level == 0) break;
        --level;
        ++cursor[level];
        continue;
      }
      assignment[level] = dom[cursor[level]];
      if (!checks_pass(level + 1)) {
        ++cursor[level];
        continue;
      }
      if (level + 1 == order.size()) {
        emit();
        ++cursor[level];
      } else {
        ++level;
      }
    }
  }
};

}  // namespace detail

/// Grounds `desc` over the instance constants. Every sort must end up with at
/// least one member (EMPTY_SORT otherwise) unless options allow empty sorts.
inline GroundedDomain ground(const SystemDescription& desc, const DomainInstance& instance,
                             GroundOptions options = {}) {
  GroundedDomain g;
  g.description = std::make_shared<const SystemDescription>(desc);
  const SystemDescription& d = *g.description;

  for (const auto& [sort, consts] : instance.constants) {
    if (d.sort(sort) == nullptr) throw Error(ErrorCode::UndeclaredSymbol, "instance names unknown sort '" + sort + "'");
    if (!d.is_leaf(sort)) throw Error(ErrorCode::SortError, "instance constants given for non-leaf sort '" + sort + "'");
  }

  std::set<std::string> all_constants;
  std::map<std::string, std::set<std::string>> leaf_members;
  for (const auto& s : d.sorts) {
    for (const auto& c : s.constants) all_constants.insert(c);
    if (!d.is_leaf(s.name)) continue;
    auto it = instance.constants.find(s.name);
    if (it != instance.constants.end()) leaf_members[s.name].insert(it->second.begin(), it->second.end());
    else leaf_members[s.name].insert(s.constants.begin(), s.constants.end());
    for (const auto& c : leaf_members[s.name]) all_constants.insert(c);
  }
  g.constants.assign(all_constants.begin(), all_constants.end());
  for (std::size_t i = 0; i < g.constants.size(); ++i) g.constant_index[g.constants[i]] = static_cast<int>(i);

  // Members of a sort: its own constants plus those of every descendant.
  for (const auto& s : d.sorts) {
    std::set<std::string> members;
    for (const auto& [leaf, consts] : leaf_members)
      if (d.is_subsort(leaf, s.name)) members.insert(consts.begin(), consts.end());
    if (members.empty() && !options.allow_empty_sorts)
      throw Error(ErrorCode::EmptySort, "sort '" + s.name + "' has no constants");
    auto& ids = g.sort_members[s.name];
    for (const auto& c : members) ids.push_back(g.constant_index.at(c));
  }

  detail::Grounder gr{d, g, {}, {}, {}, {}, {}};
  for (const auto& [sort, ids] : g.sort_members) {
    std::vector<int> pos(g.constants.size(), -1);
    for (std::size_t i = 0; i < ids.size(); ++i) pos[static_cast<std::size_t>(ids[i])] = static_cast<int>(i);
    gr.positions[sort] = std::move(pos);
  }

  int offset = 0;
  for (std::size_t p = 0; p < d.statics.size(); ++p) {
    gr.statics.push_back(gr.table(d.statics[p], offset));
    detail::Grounder::for_each_tuple(gr.statics.back(), [&](const std::vector<int>& args) {
      g.static_atoms.push_back({static_cast<int>(p), args, ground_name(d.statics[p].name, args, g.constants)});
    });
    offset += static_cast<int>(gr.statics.back().count);
  }
  g.static_truth.assign(g.static_atoms.size(), false);
  for (std::size_t i = 0; i < g.static_atoms.size(); ++i) g.static_index[g.static_atoms[i].name] = static_cast<int>(i);

  for (const auto& fact : instance.static_facts) {
    GroundAtomText t = split_ground_atom(fact);
    const PredicateDecl* p = d.predicate(t.predicate);
    if (p == nullptr || p->role != Role::Static)
      throw Error(ErrorCode::UndeclaredSymbol, "static fact '" + fact + "' does not name a declared static");
    if (p->arg_sorts.size() != t.args.size())
      throw Error(ErrorCode::SortError, "static fact '" + fact + "' has the wrong arity");
    std::string canonical = t.predicate;
    if (!t.args.empty()) {
      canonical += "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) canonical += (i ? "," : "") + t.args[i];
      canonical += ")";
    }
    auto it = g.static_index.find(canonical);
    if (it == g.static_index.end()) {
      if (options.ignore_foreign_facts) continue;
      throw Error(ErrorCode::SortError, "static fact '" + fact + "' mentions constants outside its argument sorts");
    }
    g.static_truth[static_cast<std::size_t>(it->second)] = true;
  }

  offset = 0;
  for (std::size_t p = 0; p < d.fluents.size(); ++p) {
    gr.fluents.push_back(gr.table(d.fluents[p], offset));
    detail::Grounder::for_each_tuple(gr.fluents.back(), [&](const std::vector<int>& args) {
      g.fluent_atoms.push_back({static_cast<int>(p), args, ground_name(d.fluents[p].name, args, g.constants)});
    });
    offset += static_cast<int>(gr.fluents.back().count);
  }
  for (std::size_t i = 0; i < g.fluent_atoms.size(); ++i) g.atom_index[g.fluent_atoms[i].name] = static_cast<int>(i);

  offset = 0;
  std::vector<GroundAction> enumerated;
  for (std::size_t p = 0; p < d.actions.size(); ++p) {
    gr.actions.push_back(gr.table(d.actions[p], offset));
    detail::Grounder::for_each_tuple(gr.actions.back(), [&](const std::vector<int>& args) {
      enumerated.push_back({static_cast<int>(p), args, ground_name(d.actions[p].name, args, g.constants)});
    });
    offset += static_cast<int>(gr.actions.back().count);
  }
  // Ground actions are ordered by name; this order is the planner's
  // tie-breaking order.
  std::vector<int> order(enumerated.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return enumerated[static_cast<std::size_t>(a)].name < enumerated[static_cast<std::size_t>(b)].name;
  });
  gr.action_remap.assign(enumerated.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    gr.action_remap[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    g.actions.push_back(enumerated[static_cast<std::size_t>(order[i])]);
  }
  for (std::size_t i = 0; i < g.actions.size(); ++i) g.action_index[g.actions[i].name] = static_cast<int>(i);

  for (const auto& ax : d.axioms) gr.ground_axiom(ax);

  g.causal_by_action.assign(g.actions.size(), {});
  for (std::size_t i = 0; i < g.causal_laws.size(); ++i)
    g.causal_by_action[static_cast<std::size_t>(g.causal_laws[i].action)].push_back(static_cast<int>(i));
  g.exec_by_action.assign(g.actions.size(), {});
  g.never_applicable.assign(g.actions.size(), false);
  for (std::size_t i = 0; i < g.executability.size(); ++i) {
    const auto& e = g.executability[i];
    g.exec_by_action[static_cast<std::size_t>(e.action)].push_back(static_cast<int>(i));
    if (e.body.empty()) g.never_applicable[static_cast<std::size_t>(e.action)] = true;
  }
  g.constraints_by_body_lit.assign(g.fluent_atoms.size() * 2, {});
  for (std::size_t i = 0; i < g.constraints.size(); ++i) {
    const auto& c = g.constraints[i];
    if (c.body.empty()) g.unconditional_constraints.push_back(static_cast<int>(i));
    for (Lit l : c.body) g.constraints_by_body_lit[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
  }
  return g;
}

/// Product of argument-sort sizes for one declaration: the number of ground
/// instances grounding must produce for it.
inline std::size_t instance_count(const GroundedDomain& g, const PredicateDecl& p) {
  std::size_t n = 1;
  for (const auto& s : p.arg_sorts) n *= g.sort_members.at(s).size();
  return n;
}

}  // namespace ramp::al
