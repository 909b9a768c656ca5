#pragma once

// Coarse-to-fine planning: zoom each coarse transition to the relevant part
// of the fine domain, search there for a sequence whose end state abstracts
// to the coarse post-state, then replay it through the full fine domain.

#include <chrono>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ramp/al/description.hpp"
#include "ramp/al/grounding.hpp"
#include "ramp/al/semantics.hpp"
#include "ramp/error.hpp"
#include "ramp/io/goal_io.hpp"
#include "ramp/planner/model.hpp"
#include "ramp/planner/search.hpp"

namespace ramp::planner {

/// The two shipped system descriptions.
struct Domains {
  al::SystemDescription coarse;
  al::SystemDescription fine;

  static Domains load(const std::filesystem::path& dir) {
    Domains d;
    auto parse = [&](const char* file, al::Resolution r) {
      std::string text = io::read_file(dir / file);
      try {
        return al::parse_description(text, r);
      } catch (const Error& e) {
        throw Error(e.code(), std::string(file) + ": " + e.message());
      }
    };
    d.coarse = parse("coarse.ald", al::Resolution::Coarse);
    d.fine = parse("fine.ald", al::Resolution::Fine);
    return d;
  }
};

/// A fine domain restricted to the constants relevant to one transition,
/// with index maps back into the full fine grounding.
struct ZoomedDomain {
  std::shared_ptr<const al::GroundedDomain> domain;
  std::vector<int> full_atom;    // zoom atom -> full atom
  std::vector<int> full_action;  // zoom action -> full action
  std::map<std::string, std::vector<std::string>> constants;

  /// The full fine domain viewed as its own zoom.
  static ZoomedDomain identity(std::shared_ptr<const al::GroundedDomain> full) {
    ZoomedDomain z;
    z.domain = full;
    z.full_atom.resize(full->atom_count());
    for (std::size_t i = 0; i < z.full_atom.size(); ++i) z.full_atom[i] = static_cast<int>(i);
    z.full_action.resize(full->actions.size());
    for (std::size_t i = 0; i < z.full_action.size(); ++i) z.full_action[i] = static_cast<int>(i);
    for (const auto& [sort, _] : full->sort_members) z.constants[sort] = full->members(sort);
    return z;
  }
};

namespace detail {

inline std::string coarse_robot_place(const GroundedDomain& coarse, const SymbolicState& s) {
  for (const auto& p : kCoarsePlaces) {
    auto atom = coarse.find_atom("loc(" + kRobot + "," + p + ")");
    if (atom && s.holds(*atom)) return p;
  }
  throw Error(ErrorCode::RefinementFailed, "robot has no coarse location");
}

}  // namespace detail

/// Restricts the fine description to the robot, the objects named by the
/// coarse action, its direct effects or the robot's hand, their joints, and the fine
/// places refining the robot's source and destination areas.
inline ZoomedDomain zoom(const CoarseStep& step, const GroundedDomain& coarse, const RampModel& model,
                         const al::SystemDescription& fine_desc, const GroundedDomain& full_fine) {
  std::set<std::string> beams, pegs, places;
  auto note = [&](const std::string& constant) {
    if (model.joints_of_beam.count(constant)) {
      beams.insert(constant);
    } else if (std::find(model.pegs.begin(), model.pegs.end(), constant) != model.pegs.end()) {
      pegs.insert(constant);
    } else if (auto it = model.connection_of_constant.find(constant); it != model.connection_of_constant.end()) {
      beams.insert(it->second.joint_a.beam);
      beams.insert(it->second.joint_b.beam);
    } else if (std::find(kCoarsePlaces.begin(), kCoarsePlaces.end(), constant) != kCoarsePlaces.end()) {
      places.insert(constant);
    }
  };
  auto note_args = [&](int atom) {
    for (int c : coarse.fluent_atoms[static_cast<std::size_t>(atom)].args) {
      const std::string& name = coarse.constants[static_cast<std::size_t>(c)];
      // Places reached by objects other than the robot follow the robot.
      if (std::find(kCoarsePlaces.begin(), kCoarsePlaces.end(), name) == kCoarsePlaces.end()) note(name);
    }
  };
  for (const auto& c : coarse.action_args(step.action)) note(c);
  // Direct effects only: indirect ones (anchoring of a neighbour) are read
  // through the bridge from atoms already in the zoom.
  for (al::Lit l : al::direct_effects(coarse, step.pre, step.action)) note_args(al::lit_atom(l));
  // whatever the robot carries moves with it
  for (std::size_t a = 0; a < coarse.atom_count(); ++a)
    if (coarse.fluent_atoms[a].name.rfind("in_hand(", 0) == 0 && step.pre.holds(static_cast<int>(a)))
      note_args(static_cast<int>(a));
  places.insert(detail::coarse_robot_place(coarse, step.pre));
  places.insert(detail::coarse_robot_place(coarse, step.post));

  al::DomainInstance inst;
  inst.constants["robot"] = {kRobot};
  inst.constants["beam"] = {beams.begin(), beams.end()};
  inst.constants["peg"] = {pegs.begin(), pegs.end()};
  for (const auto& b : beams)
    for (const auto& j : model.joints_of_beam.at(b)) inst.constants["joint"].push_back(j);
  if (!inst.constants.count("joint")) inst.constants["joint"] = {};
  for (const auto& p : places) {
    inst.constants["place"].push_back(approach_of(p));
    inst.constants["place"].push_back(engage_of(p));
  }
  inst.static_facts = model.fine_instance.static_facts;

  ZoomedDomain z;
  al::GroundOptions opts;
  opts.allow_empty_sorts = true;
  opts.ignore_foreign_facts = true;
  z.domain = std::make_shared<const al::GroundedDomain>(al::ground(fine_desc, inst, opts));
  for (const auto& atom : z.domain->fluent_atoms) z.full_atom.push_back(full_fine.atom_index.at(atom.name));
  for (const auto& action : z.domain->actions) z.full_action.push_back(full_fine.action_index.at(action.name));
  z.constants = inst.constants;
  return z;
}

/// Shortest fine sequence (in full-domain action ids) that takes the fine
/// state `fine_pre` to one whose abstraction equals `coarse_post`.
/// REFINEMENT_FAILED when none exists within `max_horizon` or the found
/// sequence does not replay coherently in the full fine domain.
inline std::vector<int> refine_transition(const ZoomedDomain& zoomed, const GroundedDomain& full_fine,
                                          const BridgeMap& bridge, const SymbolicState& fine_pre,
                                          const SymbolicState& coarse_post, int max_horizon, SearchStats& stats) {
  const GroundedDomain& zg = *zoomed.domain;
  // Coarse atoms whose bridge formula touches the zoom; the rest must
  // already agree with the post-state.
  std::vector<bool> in_zoom(full_fine.atom_count(), false);
  for (int a : zoomed.full_atom) in_zoom[static_cast<std::size_t>(a)] = true;
  std::vector<std::size_t> watched;
  for (std::size_t c = 0; c < bridge.size(); ++c) {
    bool touches = false;
    for (int f : bridge.fine_atoms_of(c)) touches = touches || in_zoom[static_cast<std::size_t>(f)];
    if (touches) {
      watched.push_back(c);
    } else if (bridge.holds(c, fine_pre) != coarse_post.holds(static_cast<int>(c))) {
      throw Error(ErrorCode::RefinementFailed,
                  "coarse atom " + bridge.rules[c].coarse_atom + " changes outside the zoomed domain");
    }
  }

  SymbolicState start(zg.atom_count());
  for (std::size_t i = 0; i < zoomed.full_atom.size(); ++i)
    start.set(static_cast<int>(i), fine_pre.holds(zoomed.full_atom[i]));

  SymbolicState overlay = fine_pre;
  auto is_goal = [&](const SymbolicState& z) {
    for (std::size_t i = 0; i < zoomed.full_atom.size(); ++i) overlay.set(zoomed.full_atom[i], z.holds(static_cast<int>(i)));
    for (std::size_t c : watched)
      if (bridge.holds(c, overlay) != coarse_post.holds(static_cast<int>(c))) return false;
    return true;
  };
  std::vector<int> actions;
  for (std::size_t a = 0; a < zg.actions.size(); ++a)
    if (!zg.never_applicable[a]) actions.push_back(static_cast<int>(a));
  IterativeDeepening search(zg, actions, is_goal);
  bool exhausted = false;
  auto found = search.run(start, max_horizon, stats, exhausted);
  if (!found)
    throw Error(ErrorCode::RefinementFailed, "no fine refinement within horizon " + std::to_string(max_horizon));

  std::vector<int> out;
  SymbolicState cur = fine_pre;
  for (int za : *found) {
    const int fa = zoomed.full_action[static_cast<std::size_t>(za)];
    if (!al::applicable(full_fine, cur, fa))
      throw Error(ErrorCode::RefinementFailed, full_fine.action_name(fa) + " is not executable in the full fine domain");
    cur = al::successor(full_fine, cur, fa);
    out.push_back(fa);
  }
  if (!(bridge.abstract(cur) == coarse_post))
    throw Error(ErrorCode::RefinementFailed, "refined segment does not abstract to the coarse post-state");
  return out;
}

struct FineSegment {
  std::size_t coarse_step = 0;  // 1-based
  std::vector<int> actions;     // full fine action ids
};

struct FinePlan {
  std::shared_ptr<const GroundedDomain> domain;
  SymbolicState init;
  std::vector<FineSegment> segments;

  std::vector<int> flattened() const {
    std::vector<int> out;
    for (const auto& s : segments) out.insert(out.end(), s.actions.begin(), s.actions.end());
    return out;
  }
  std::vector<std::string> flattened_names() const {
    std::vector<std::string> out;
    for (int a : flattened()) out.push_back(domain->action_name(a));
    return out;
  }
  /// Number of flattened actions whose name is `predicate`.
  std::size_t count(std::string_view predicate) const {
    std::size_t n = 0;
    for (int a : flattened()) n += domain->action_predicate(a) == predicate ? 1 : 0;
    return n;
  }
};

struct PlanningStats {
  double wall_time_s = 0.0;
  std::size_t coarse_nodes = 0;
  std::size_t fine_nodes = 0;
  std::size_t coarse_horizon = 0;
  std::size_t fine_length = 0;
};

struct PlanOptions {
  int coarse_horizon = kDefaultCoarseHorizon;
  int fine_horizon = kDefaultFineHorizon;
  bool use_zoom = true;
};

struct PlanResult {
  std::shared_ptr<const RampModel> model;
  std::shared_ptr<const GroundedDomain> coarse;
  std::shared_ptr<const BridgeMap> bridge;
  CoarsePlan coarse_plan;
  FinePlan fine;
  PlanningStats stats;
};

/// Coarse plan for the goal, refined transition by transition.
inline PlanResult plan(const GoalConfiguration& goal, const Domains& domains, const PlanOptions& options = {}) {
  const auto started = std::chrono::steady_clock::now();
  PlanResult r;
  auto model = std::make_shared<RampModel>(build_model(goal));
  r.model = model;
  r.coarse = std::make_shared<const GroundedDomain>(al::ground(domains.coarse, model->coarse_instance));
  auto fine = std::make_shared<const GroundedDomain>(al::ground(domains.fine, model->fine_instance));
  r.bridge = std::make_shared<const BridgeMap>(*model, *r.coarse, *fine);

  r.coarse_plan = plan_coarse(*r.coarse, History{model->coarse_init}, model->coarse_goal, options.coarse_horizon);

  r.fine.domain = fine;
  r.fine.init = al::make_state(*fine, model->fine_init);
  if (!(r.bridge->abstract(r.fine.init) == al::make_state(*r.coarse, model->coarse_init)))
    throw Error(ErrorCode::InvalidInit, "fine initial state does not abstract to the coarse initial state");

  SymbolicState cur = r.fine.init;
  SearchStats fine_stats;
  for (std::size_t i = 0; i < r.coarse_plan.steps.size(); ++i) {
    const CoarseStep& step = r.coarse_plan.steps[i];
    ZoomedDomain z = options.use_zoom ? zoom(step, *r.coarse, *model, domains.fine, *fine) : ZoomedDomain::identity(fine);
    std::vector<int> seg;
    try {
      seg = refine_transition(z, *fine, *r.bridge, cur, step.post, options.fine_horizon, fine_stats);
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(i + 1) + " " + r.coarse->action_name(step.action) + ": " + e.message());
    }
    for (int a : seg) cur = al::successor(*fine, cur, a);
    r.fine.segments.push_back({i + 1, std::move(seg)});
  }

  r.stats.coarse_nodes = r.coarse_plan.stats.nodes_expanded;
  r.stats.fine_nodes = fine_stats.nodes_expanded;
  r.stats.coarse_horizon = r.coarse_plan.horizon();
  r.stats.fine_length = r.fine.flattened().size();
  r.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

/// Canonical plan file. Timing is optional so plans can be compared byte for
/// byte across runs.
inline nlohmann::json plan_to_json(const PlanResult& r, bool include_timing = true) {
  nlohmann::json j;
  j["goal"] = r.model->goal.id;
  j["coarse"] = r.coarse_plan.action_names(*r.coarse);
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& seg : r.fine.segments) {
    for (int a : seg.actions) {
      nlohmann::json step;
      step["action"] = r.fine.domain->action_predicate(a);
      step["args"] = r.fine.domain->action_args(a);
      step["coarse_step"] = seg.coarse_step;
      actions.push_back(std::move(step));
    }
  }
  j["actions"] = std::move(actions);
  nlohmann::json stats;
  stats["coarse_horizon"] = r.stats.coarse_horizon;
  stats["fine_length"] = r.stats.fine_length;
  stats["nodes_expanded"] = r.stats.coarse_nodes + r.stats.fine_nodes;
  if (include_timing) stats["planning_time_s"] = r.stats.wall_time_s;
  j["stats"] = std::move(stats);
  return j;
}

}  // namespace ramp::planner
