#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/core/types.hpp"
#include "ramp/error.hpp"

namespace ramp {

/// The seven baseline skills, one per fine-resolution action.
enum class Skill { Move, PickUp, PutDown, AssembleSquare, AssembleCap, Fasten, Push };

inline constexpr Skill kAllSkills[] = {Skill::Move,           Skill::PickUp,      Skill::PutDown,
                                       Skill::AssembleSquare, Skill::AssembleCap, Skill::Fasten,
                                       Skill::Push};

constexpr std::string_view to_string(Skill s) {
  switch (s) {
    case Skill::Move: return "move";
    case Skill::PickUp: return "pick_up";
    case Skill::PutDown: return "put_down";
    case Skill::AssembleSquare: return "assemble_square";
    case Skill::AssembleCap: return "assemble_cap";
    case Skill::Fasten: return "fasten";
    case Skill::Push: return "push";
  }
  return "?";
}

inline std::optional<Skill> skill_from_string(std::string_view s) {
  for (Skill k : kAllSkills)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

enum class ThingKind { Beam, Peg };

struct Thing {
  ThingKind kind = ThingKind::Beam;
  std::string id;
  friend bool operator==(const Thing&, const Thing&) = default;
};

struct BeamStatus {
  enum class Where { OnTemplate, InHand, Assembled };
  Where where = Where::OnTemplate;
  std::string slot;  // template slot; kept while the beam is in hand
  friend bool operator==(const BeamStatus&, const BeamStatus&) = default;
};

struct PegStatus {
  enum class Where { InHolder, InHand, Inserted, Dropped };
  Where where = Where::InHolder;
  std::string slot;
  std::optional<Connection> connection;  // set iff Inserted
  friend bool operator==(const PegStatus&, const PegStatus&) = default;
};

/// Discrete symbolic state of the cell: no poses, only where each part is.
struct WorldState {
  std::map<std::string, BeamStatus> beam_at;
  std::map<std::string, PegStatus> peg_at;
  std::string robot_loc;
  std::optional<Thing> hand;
  std::set<Connection> mated;
  std::uint64_t step = 0;

  bool is_mated(const Connection& c) const {
    for (const auto& m : mated)
      if (m.same_joints(c)) return true;
    return false;
  }

  /// Returns a description of the first violated invariant, if any.
  std::optional<std::string> invariant_violation() const {
    std::size_t in_hand = 0;
    for (const auto& [id, b] : beam_at) {
      if (b.where == BeamStatus::Where::InHand) {
        ++in_hand;
        if (!hand || hand->kind != ThingKind::Beam || hand->id != id)
          return "beam " + id + " marked in hand but hand disagrees";
      }
    }
    for (const auto& [id, p] : peg_at) {
      if (p.where == PegStatus::Where::InHand) {
        ++in_hand;
        if (!hand || hand->kind != ThingKind::Peg || hand->id != id)
          return "peg " + id + " marked in hand but hand disagrees";
      }
      if (p.where == PegStatus::Where::Inserted) {
        if (!p.connection) return "peg " + id + " inserted without a connection";
        if (!is_mated(*p.connection)) return "peg " + id + " inserted into unmated connection";
      } else if (p.connection) {
        return "peg " + id + " carries a connection but is not inserted";
      }
    }
    if (in_hand > 1) return "more than one thing in hand";
    if (hand && in_hand == 0) return "hand holds " + hand->id + " but no part is marked in hand";
    for (const auto& c : mated) {
      for (const std::string* beam : {&c.joint_a.beam, &c.joint_b.beam}) {
        auto it = beam_at.find(*beam);
        if (it == beam_at.end() || it->second.where != BeamStatus::Where::Assembled)
          return "mated connection " + to_string(c) + " involves unassembled beam " + *beam;
      }
    }
    return std::nullopt;
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class EventKind { SkillStarted, SkillSucceeded, SkillFailed, PegInserted, PegDropped, RunEnded };

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::SkillStarted: return "skill_started";
    case EventKind::SkillSucceeded: return "skill_succeeded";
    case EventKind::SkillFailed: return "skill_failed";
    case EventKind::PegInserted: return "peg_inserted";
    case EventKind::PegDropped: return "peg_dropped";
    case EventKind::RunEnded: return "run_ended";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (EventKind k : {EventKind::SkillStarted, EventKind::SkillSucceeded, EventKind::SkillFailed,
                      EventKind::PegInserted, EventKind::PegDropped, EventKind::RunEnded})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// One timestamped event of a simulated run. `object` names the beam or peg
/// the skill acted on, `place` the move target, and `connections` the goal
/// connections mated by an assembly or fastened by a peg insertion.
struct ExecutionEvent {
  double t_s = 0.0;
  EventKind kind = EventKind::SkillStarted;
  std::optional<Skill> skill;
  std::vector<std::string> args;
  int attempt_index = 0;
  std::optional<Thing> object;
  std::string place;
  std::vector<Connection> connections;
  std::string note;

  friend bool operator==(const ExecutionEvent&, const ExecutionEvent&) = default;
};

namespace detail {

[[noreturn]] inline void illegal(const std::string& msg) { throw Error(ErrorCode::IllegalEvent, msg); }

inline void require_object(const ExecutionEvent& e) {
  if (!e.object) illegal(std::string(to_string(e.kind)) + " event has no object");
}

}  // namespace detail

/// Applies the effect of one event to a copy of `state`. Events without a
/// world effect (starts, failures, run end, fasten/push successes) return
/// the state unchanged; the fasten effect is carried by peg_inserted.
inline WorldState apply_event(const WorldState& state, const ExecutionEvent& event) {
  using detail::illegal;
  WorldState next = state;
  auto require_empty_hand = [&] {
    if (next.hand) illegal("hand already holds " + next.hand->id);
  };
  auto require_holding = [&](const Thing& t) {
    if (!next.hand || !(*next.hand == t)) illegal("hand does not hold " + t.id);
  };

  switch (event.kind) {
    case EventKind::SkillStarted:
    case EventKind::SkillFailed:
    case EventKind::RunEnded:
      return next;
    case EventKind::PegDropped: {
      detail::require_object(event);
      const Thing& peg = *event.object;
      if (peg.kind != ThingKind::Peg) illegal("peg_dropped on a beam");
      require_holding(peg);
      next.peg_at.at(peg.id).where = PegStatus::Where::Dropped;
      next.hand.reset();
      ++next.step;
      return next;
    }
    case EventKind::PegInserted: {
      detail::require_object(event);
      const Thing& peg = *event.object;
      if (peg.kind != ThingKind::Peg) illegal("peg_inserted on a beam");
      if (event.connections.size() != 1) illegal("peg_inserted must name exactly one connection");
      const Connection& c = event.connections.front();
      require_holding(peg);
      if (!next.is_mated(c)) illegal("connection " + to_string(c) + " is not mated");
      for (const auto& [id, p] : next.peg_at) {
        if (p.where == PegStatus::Where::Inserted && p.connection->same_joints(c))
          illegal("connection " + to_string(c) + " already holds peg " + id);
      }
      auto& status = next.peg_at.at(peg.id);
      status.where = PegStatus::Where::Inserted;
      status.connection = c;
      next.hand.reset();
      ++next.step;
      return next;
    }
    case EventKind::SkillSucceeded:
      break;
  }

  if (!event.skill) illegal("skill_succeeded without a skill");
  switch (*event.skill) {
    case Skill::Move:
      if (event.place.empty()) illegal("move without a target place");
      next.robot_loc = event.place;
      break;
    case Skill::PickUp: {
      detail::require_object(event);
      const Thing& t = *event.object;
      require_empty_hand();
      if (t.kind == ThingKind::Beam) {
        auto it = next.beam_at.find(t.id);
        if (it == next.beam_at.end()) illegal("unknown beam " + t.id);
        if (it->second.where != BeamStatus::Where::OnTemplate) illegal("beam " + t.id + " is not on the template");
        it->second.where = BeamStatus::Where::InHand;
      } else {
        auto it = next.peg_at.find(t.id);
        if (it == next.peg_at.end()) illegal("unknown peg " + t.id);
        if (it->second.where != PegStatus::Where::InHolder) illegal("peg " + t.id + " is not in its holder");
        it->second.where = PegStatus::Where::InHand;
      }
      next.hand = t;
      break;
    }
    case Skill::PutDown: {
      detail::require_object(event);
      const Thing& t = *event.object;
      require_holding(t);
      if (t.kind == ThingKind::Beam) next.beam_at.at(t.id).where = BeamStatus::Where::OnTemplate;
      else next.peg_at.at(t.id).where = PegStatus::Where::InHolder;
      next.hand.reset();
      break;
    }
    case Skill::AssembleSquare:
    case Skill::AssembleCap: {
      detail::require_object(event);
      const Thing& t = *event.object;
      if (t.kind != ThingKind::Beam) illegal("assembly of a peg");
      require_holding(t);
      next.beam_at.at(t.id).where = BeamStatus::Where::Assembled;
      next.hand.reset();
      for (const auto& c : event.connections) {
        if (!c.involves(t.id)) illegal("connection " + to_string(c) + " does not involve " + t.id);
        const std::string& other = c.joint_a.beam == t.id ? c.joint_b.beam : c.joint_a.beam;
        auto it = next.beam_at.find(other);
        if (it == next.beam_at.end() || it->second.where != BeamStatus::Where::Assembled)
          illegal("connection " + to_string(c) + " partner " + other + " is not assembled");
        next.mated.insert(c);
      }
      break;
    }
    case Skill::Fasten:
    case Skill::Push:
      break;
  }
  ++next.step;
  return next;
}

enum class ConnectionStatus { Unsatisfied, MatedOnly, Fastened };

constexpr std::string_view to_string(ConnectionStatus s) {
  switch (s) {
    case ConnectionStatus::Unsatisfied: return "unsatisfied";
    case ConnectionStatus::MatedOnly: return "mated_only";
    case ConnectionStatus::Fastened: return "fastened";
  }
  return "?";
}

struct SatisfactionReport {
  std::map<Connection, ConnectionStatus> per_connection;
  std::size_t fastened_pegs = 0;
  std::size_t required_pegs = 0;
  double completion_pct = 0.0;
};

/// Completion = 100 * fastened peg-requiring connections / peg-requiring
/// connections. A goal with no peg-requiring connections counts as complete.
inline double completion_percent(std::size_t fastened, std::size_t required) {
  if (required == 0) return 100.0;
  return 100.0 * static_cast<double>(fastened) / static_cast<double>(required);
}

inline SatisfactionReport satisfaction(const WorldState& state, const GoalConfiguration& goal) {
  SatisfactionReport report;
  for (const auto& c : goal.connections) {
    bool fastened = false;
    for (const auto& [_, p] : state.peg_at) {
      if (p.where == PegStatus::Where::Inserted && p.connection && p.connection->same_joints(c)) {
        fastened = true;
        break;
      }
    }
    ConnectionStatus status = fastened            ? ConnectionStatus::Fastened
                              : state.is_mated(c) ? ConnectionStatus::MatedOnly
                                                  : ConnectionStatus::Unsatisfied;
    report.per_connection.emplace(c, status);
    if (c.requires_peg) {
      ++report.required_pegs;
      if (status == ConnectionStatus::Fastened) ++report.fastened_pegs;
    }
  }
  report.completion_pct = completion_percent(report.fastened_pegs, report.required_pegs);
  return report;
}

}  // namespace ramp
