#pragma once

// Builds the coarse and fine domain instances for one goal, and the bridge
// that maps every coarse fluent atom onto a formula over fine atoms.

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ramp/al/grounding.hpp"
#include "ramp/al/semantics.hpp"
#include "ramp/core/types.hpp"
#include "ramp/error.hpp"
#include "ramp/io/goal_io.hpp"

namespace ramp::planner {

inline const std::string kRobot = "rob";
inline const std::array<std::string, 3> kCoarsePlaces{"template", "holder", "assembly"};

inline std::string approach_of(const std::string& place) { return place + "_approach"; }
inline std::string engage_of(const std::string& place) { return place + "_engage"; }

inline std::string joint_constant(const JointRef& j) { return j.beam + "_j" + std::to_string(j.joint); }

inline std::string connection_constant(const Connection& c) {
  return "c_" + c.joint_a.beam + "_" + std::to_string(c.joint_a.joint) + "_" + c.joint_b.beam + "_" +
         std::to_string(c.joint_b.joint);
}

/// Beam ids become constants of the action language, which must start with
/// a letter and cannot contain '-'.
inline void require_constant_name(const std::string& id) {
  bool ok = !id.empty() && id.front() >= 'a' && id.front() <= 'z' && id.find('-') == std::string::npos;
  if (!ok) throw Error(ErrorCode::SemanticError, "beam id '" + id + "' cannot be used as a planner constant");
}

/// Everything the planner needs to know about one goal at both resolutions.
struct RampModel {
  GoalConfiguration goal;
  std::vector<std::string> pegs;  // p01..pN, N = max(1, peg-requiring connections)
  std::vector<std::string> movable_beams;

  al::DomainInstance coarse_instance;
  std::vector<std::string> coarse_init;
  std::vector<std::string> coarse_goal;

  al::DomainInstance fine_instance;
  std::vector<std::string> fine_init;

  std::map<std::string, Connection> connection_of_constant;
  std::map<std::pair<std::string, std::string>, Connection> connection_of_joints;  // canonical joint constants
  std::map<std::string, std::string> beam_of_joint;
  std::map<std::string, std::vector<std::string>> joints_of_beam;
  /// Coarse constant -> fine constants it refines into.
  std::map<std::string, std::vector<std::string>> refinement;

  bool is_cap_beam(const std::string& beam) const {
    for (const auto& c : goal.connections) {
      for (const JointRef* j : {&c.joint_a, &c.joint_b}) {
        if (j->beam == beam && goal.beam(beam)->joint(j->joint)->kind == JointKind::Cap) return true;
      }
    }
    return false;
  }
};

inline RampModel build_model(const GoalConfiguration& goal) {
  RampModel m;
  m.goal = goal;
  const std::size_t pegs = std::max<std::size_t>(1, goal.peg_connection_count());
  for (std::size_t i = 0; i < pegs; ++i) m.pegs.push_back(io::LayoutTemplate::peg_id(i));

  std::vector<std::string> beams;
  std::string fixed;
  for (const auto& b : goal.beams) {
    require_constant_name(b.id);
    beams.push_back(b.id);
    if (b.fixed) fixed = b.id;
    else m.movable_beams.push_back(b.id);
  }

  // Coarse instance.
  auto& ci = m.coarse_instance;
  ci.constants["robot"] = {kRobot};
  ci.constants["beam"] = beams;
  ci.constants["peg"] = m.pegs;
  for (const auto& c : goal.connections) {
    std::string name = connection_constant(c);
    ci.constants["connection"].push_back(name);
    m.connection_of_constant.emplace(name, c);
  }
  for (const auto& p1 : kCoarsePlaces)
    for (const auto& p2 : kCoarsePlaces)
      if (p1 != p2) ci.static_facts.push_back("next_to(" + p1 + "," + p2 + ")");
  for (const auto& c : goal.connections) {
    const std::string name = connection_constant(c);
    const auto& a = c.joint_a;
    const auto& b = c.joint_b;
    ci.static_facts.push_back("conn_between(" + name + "," + a.beam + "," + b.beam + ")");
    ci.static_facts.push_back("conn_between(" + name + "," + b.beam + "," + a.beam + ")");
    if (c.requires_peg) ci.static_facts.push_back("needs_peg(" + name + ")");
    const JointKind ka = goal.beam(a.beam)->joint(a.joint)->kind;
    const JointKind kb = goal.beam(b.beam)->joint(b.joint)->kind;
    if (ka == JointKind::Tab && kb == JointKind::Socket) ci.static_facts.push_back("tab_link(" + a.beam + "," + b.beam + ")");
    if (kb == JointKind::Tab && ka == JointKind::Socket) ci.static_facts.push_back("tab_link(" + b.beam + "," + a.beam + ")");
  }
  for (const auto& b : beams)
    if (m.is_cap_beam(b)) ci.static_facts.push_back("cap_beam(" + b + ")");
  for (std::size_t i = 0; i < m.pegs.size(); ++i)
    for (std::size_t j = i + 1; j < m.pegs.size(); ++j)
      ci.static_facts.push_back("precedes(" + m.pegs[i] + "," + m.pegs[j] + ")");
  std::sort(ci.static_facts.begin(), ci.static_facts.end());
  ci.static_facts.erase(std::unique(ci.static_facts.begin(), ci.static_facts.end()), ci.static_facts.end());

  m.coarse_init.push_back("loc(" + kRobot + ",assembly)");
  for (const auto& b : beams) {
    if (b == fixed) {
      m.coarse_init.push_back("loc(" + b + ",assembly)");
      m.coarse_init.push_back("assembled(" + b + ")");
    } else {
      m.coarse_init.push_back("loc(" + b + ",template)");
    }
  }
  for (const auto& p : m.pegs) m.coarse_init.push_back("loc(" + p + ",holder)");

  for (const auto& b : m.movable_beams) m.coarse_goal.push_back("assembled(" + b + ")");
  for (const auto& c : goal.connections) {
    const std::string name = connection_constant(c);
    m.coarse_goal.push_back((c.requires_peg ? "fastened(" : "mated(") + name + ")");
  }
  for (const auto& b : beams)
    if (m.is_cap_beam(b)) m.coarse_goal.push_back("-misaligned(" + b + ")");

  // Fine instance.
  auto& fi = m.fine_instance;
  fi.constants["robot"] = {kRobot};
  fi.constants["beam"] = beams;
  fi.constants["peg"] = m.pegs;
  for (const auto& b : goal.beams) {
    for (const auto& j : b.joints) {
      const std::string name = joint_constant({b.id, j.index});
      fi.constants["joint"].push_back(name);
      fi.static_facts.push_back("part_of(" + name + "," + b.id + ")");
      if (j.kind == JointKind::Cap) fi.static_facts.push_back("is_cap(" + name + ")");
      m.beam_of_joint[name] = b.id;
      m.joints_of_beam[b.id].push_back(name);
    }
  }
  for (const auto& p : kCoarsePlaces) {
    fi.static_facts.push_back("next_to(" + approach_of(p) + "," + engage_of(p) + ")");
    fi.static_facts.push_back("next_to(" + engage_of(p) + "," + approach_of(p) + ")");
    for (const auto& q : kCoarsePlaces)
      if (p != q) fi.static_facts.push_back("next_to(" + approach_of(p) + "," + approach_of(q) + ")");
  }
  for (const auto& c : goal.connections) {
    const std::string ja = joint_constant(c.joint_a);
    const std::string jb = joint_constant(c.joint_b);
    fi.static_facts.push_back("conn(" + ja + "," + jb + ")");
    if (c.requires_peg) fi.static_facts.push_back("needs_peg(" + ja + "," + jb + ")");
    const JointKind ka = goal.beam(c.joint_a.beam)->joint(c.joint_a.joint)->kind;
    const JointKind kb = goal.beam(c.joint_b.beam)->joint(c.joint_b.joint)->kind;
    if (ka == JointKind::Tab && kb == JointKind::Socket) fi.static_facts.push_back("tab_into(" + ja + "," + jb + ")");
    if (kb == JointKind::Tab && ka == JointKind::Socket) fi.static_facts.push_back("tab_into(" + jb + "," + ja + ")");
    m.connection_of_joints.emplace(std::make_pair(ja, jb), c);
  }
  for (const auto& b : beams)
    if (m.is_cap_beam(b)) fi.static_facts.push_back("cap_beam(" + b + ")");
  std::sort(fi.static_facts.begin(), fi.static_facts.end());

  m.fine_init.push_back("loc(" + kRobot + "," + approach_of("assembly") + ")");
  for (const auto& b : beams) {
    if (b == fixed) {
      m.fine_init.push_back("loc(" + b + "," + engage_of("assembly") + ")");
      m.fine_init.push_back("assembled(" + b + ")");
    } else {
      m.fine_init.push_back("loc(" + b + "," + engage_of("template") + ")");
    }
  }
  for (const auto& p : m.pegs) m.fine_init.push_back("loc(" + p + "," + engage_of("holder") + ")");

  // Constant refinement.
  m.refinement[kRobot] = {kRobot};
  for (const auto& p : kCoarsePlaces) m.refinement[p] = {approach_of(p), engage_of(p)};
  for (const auto& b : beams) {
    m.refinement[b] = {b};
    for (const auto& j : m.joints_of_beam[b]) m.refinement[b].push_back(j);
  }
  for (const auto& p : m.pegs) m.refinement[p] = {p};
  for (const auto& [name, c] : m.connection_of_constant)
    m.refinement[name] = {joint_constant(c.joint_a), joint_constant(c.joint_b)};
  return m;
}

/// One bridge rule: a coarse atom holds iff one of the conjunctions of fine
/// literals holds.
struct BridgeRule {
  std::string coarse_atom;
  std::vector<std::vector<std::string>> dnf;
};

/// Bridge between a grounded coarse domain and a grounded fine domain for the
/// same goal. Holds exactly one rule per coarse fluent atom.
class BridgeMap {
 public:
  std::vector<BridgeRule> rules;  // in coarse atom order

  BridgeMap() = default;

  BridgeMap(const RampModel& model, const al::GroundedDomain& coarse, const al::GroundedDomain& fine) {
    for (std::size_t a = 0; a < coarse.atom_count(); ++a) {
      const auto& atom = coarse.fluent_atoms[a];
      const std::string& pred = coarse.description->fluents[static_cast<std::size_t>(atom.predicate)].name;
      std::vector<std::string> args;
      for (int c : atom.args) args.push_back(coarse.constants[static_cast<std::size_t>(c)]);
      rules.push_back({atom.name, rule_for(model, pred, args)});
    }
    compile(fine);
  }

  /// Coarse state abstracted from a complete fine state.
  al::SymbolicState abstract(const al::SymbolicState& fine_state) const {
    al::SymbolicState out(compiled_.size());
    for (std::size_t a = 0; a < compiled_.size(); ++a) out.set(static_cast<int>(a), holds(a, fine_state));
    return out;
  }

  /// Value of coarse atom `a` in the abstraction of `fine_state`.
  bool holds(std::size_t a, const al::SymbolicState& fine_state) const {
    for (const auto& conj : compiled_[a]) {
      if (al::body_holds(fine_state, conj)) return true;
    }
    return false;
  }

  /// Fine atoms mentioned by the rule for coarse atom `a`.
  std::vector<int> fine_atoms_of(std::size_t a) const {
    std::vector<int> out;
    for (const auto& conj : compiled_[a])
      for (al::Lit l : conj) out.push_back(al::lit_atom(l));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::size_t size() const { return rules.size(); }

 private:
  std::vector<std::vector<std::vector<al::Lit>>> compiled_;

  static std::vector<std::vector<std::string>> rule_for(const RampModel& m, const std::string& pred,
                                                        const std::vector<std::string>& args) {
    auto atom = [](const std::string& p, std::initializer_list<std::string> xs) {
      std::string s = p + "(";
      bool first = true;
      for (const auto& x : xs) {
        s += (first ? "" : ",") + x;
        first = false;
      }
      return s + ")";
    };
    std::vector<std::vector<std::string>> dnf;
    if (pred == "loc") {
      for (const auto& p : m.refinement.at(args[1])) dnf.push_back({atom("loc", {args[0], p})});
    } else if (pred == "in_hand") {
      auto joints = m.joints_of_beam.find(args[1]);
      if (joints != m.joints_of_beam.end()) {
        for (const auto& j : joints->second) dnf.push_back({atom("in_hand", {args[0], j})});
      } else {
        dnf.push_back({atom("in_hand", {args[0], args[1]})});
      }
    } else if (pred == "assembled" || pred == "spent" || pred == "misaligned") {
      dnf.push_back({atom(pred, {args[0]})});
    } else if (pred == "anchored") {
      // Anchored by any assembled beam whose socket takes one of its tabs.
      for (const auto& c : m.goal.connections) {
        for (int side = 0; side < 2; ++side) {
          const JointRef& mine = side == 0 ? c.joint_a : c.joint_b;
          const JointRef& other = side == 0 ? c.joint_b : c.joint_a;
          if (mine.beam != args[0]) continue;
          if (m.goal.beam(mine.beam)->joint(mine.joint)->kind == JointKind::Tab &&
              m.goal.beam(other.beam)->joint(other.joint)->kind == JointKind::Socket)
            dnf.push_back({atom("assembled", {other.beam})});
        }
      }
    } else if (pred == "mated" || pred == "fastened") {
      const Connection& c = m.connection_of_constant.at(args[0]);
      dnf.push_back({atom(pred == "mated" ? "joined" : "pinned", {joint_constant(c.joint_a), joint_constant(c.joint_b)})});
    } else {
      throw Error(ErrorCode::SemanticError, "no bridge rule for coarse fluent '" + pred + "'");
    }
    return dnf;
  }

  void compile(const al::GroundedDomain& fine) {
    compiled_.clear();
    for (const auto& r : rules) {
      std::vector<std::vector<al::Lit>> dnf;
      for (const auto& conj : r.dnf) {
        std::vector<al::Lit> lits;
        for (const auto& l : conj) lits.push_back(fine.literal(l));
        dnf.push_back(std::move(lits));
      }
      compiled_.push_back(std::move(dnf));
    }
  }
};

}  // namespace ramp::planner
