#pragma once

// Trace files (one JSON object per line, header first) and replay of a trace
// into a completion-over-time step function.

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ramp/core/types.hpp"
#include "ramp/core/world_state.hpp"
#include "ramp/error.hpp"
#include "ramp/io/goal_io.hpp"
#include "ramp/sim/execute.hpp"

namespace ramp::sim {

inline nlohmann::json event_to_json(const ExecutionEvent& e) {
  nlohmann::json j;
  j["t_s"] = e.t_s;
  j["kind"] = std::string(to_string(e.kind));
  j["attempt"] = e.attempt_index;
  if (e.skill) {
    j["skill"] = std::string(to_string(*e.skill));
    j["args"] = e.args;
  }
  if (e.object)
    j["object"] = {{"kind", e.object->kind == ThingKind::Beam ? "beam" : "peg"}, {"id", e.object->id}};
  if (!e.place.empty()) j["place"] = e.place;
  if (!e.connections.empty()) {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : e.connections) cs.push_back(to_string(c));
    j["connections"] = std::move(cs);
  }
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

namespace detail {

[[noreturn]] inline void malformed(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line) + ": " + msg);
}

/// "b0.0-b1.1" against the goal's connections, so requires_peg is restored.
inline Connection parse_connection_ref(const std::string& text, const GoalConfiguration& goal, std::size_t line) {
  for (const auto& c : goal.connections)
    if (to_string(c) == text) return c;
  malformed(line, "connection '" + text + "' is not part of goal " + goal.id);
}

inline ExecutionEvent event_from_json(const nlohmann::json& j, const GoalConfiguration& goal, std::size_t line) {
  static const std::set<std::string> known{"t_s",    "kind",  "attempt",     "skill", "args",
                                           "object", "place", "connections", "note"};
  if (!j.is_object()) malformed(line, "event is not an object");
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) malformed(line, "unknown field '" + k + "'");
  ExecutionEvent e;
  try {
    e.t_s = j.at("t_s").get<double>();
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) malformed(line, "unknown event kind");
    e.kind = *kind;
    e.attempt_index = j.at("attempt").get<int>();
    if (j.contains("skill")) {
      auto skill = skill_from_string(j.at("skill").get<std::string>());
      if (!skill) malformed(line, "unknown skill");
      e.skill = *skill;
      e.args = j.at("args").get<std::vector<std::string>>();
    }
    if (j.contains("object")) {
      const auto& o = j.at("object");
      const std::string kind_text = o.at("kind").get<std::string>();
      if (kind_text != "beam" && kind_text != "peg") malformed(line, "object kind must be beam or peg");
      e.object = Thing{kind_text == "beam" ? ThingKind::Beam : ThingKind::Peg, o.at("id").get<std::string>()};
    }
    if (j.contains("place")) e.place = j.at("place").get<std::string>();
    if (j.contains("connections"))
      for (const auto& c : j.at("connections")) e.connections.push_back(parse_connection_ref(c.get<std::string>(), goal, line));
    if (j.contains("note")) e.note = j.at("note").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    malformed(line, ex.what());
  }
  if (!(e.t_s >= 0)) malformed(line, "negative timestamp");
  if (e.attempt_index < 0) malformed(line, "negative attempt index");
  return e;
}

}  // namespace detail

inline std::string trace_to_jsonl(const ExecutionTrace& t) {
  nlohmann::json header;
  header["seed"] = t.seed;
  header["config_hash"] = t.config_hash;
  header["plan_hash"] = t.plan_hash;
  header["planning_time_s"] = t.planning_time_s;
  header["goal"] = t.goal_id;
  std::string out = header.dump() + "\n";
  for (const auto& e : t.events) out += event_to_json(e).dump() + "\n";
  return out;
}

/// A point where the completion curve (possibly) steps up.
struct TimelinePoint {
  double t_s = 0.0;
  double completion_pct = 0.0;
  std::size_t fastened = 0;
};

/// Checks the trace and folds it from `initial`. MALFORMED_TRACE on a
/// timestamp regression or an event that is illegal in the state reached.
inline WorldState fold_events(const std::vector<ExecutionEvent>& events, const WorldState& initial) {
  WorldState s = initial;
  double last = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.t_s < last) detail::malformed(i + 2, "timestamp goes backwards");
    last = e.t_s;
    try {
      s = apply_event(s, e);
    } catch (const Error& err) {
      detail::malformed(i + 2, err.message());
    }
    if (auto bad = s.invariant_violation()) detail::malformed(i + 2, *bad);
  }
  return s;
}

/// Parses a trace file for `goal`. The initial state is rebuilt from the
/// goal and layout, and the final state from the events.
inline ExecutionTrace parse_trace(const std::string& text, const GoalConfiguration& goal,
                                  const io::LayoutTemplate& layout) {
  ExecutionTrace t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) detail::malformed(line_no, "empty line");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      detail::malformed(line_no, ex.what());
    }
    if (!have_header) {
      try {
        for (const auto& [k, _] : j.items())
          if (k != "seed" && k != "config_hash" && k != "plan_hash" && k != "planning_time_s" && k != "goal")
            detail::malformed(line_no, "unknown header field '" + k + "'");
        t.seed = j.at("seed").get<std::uint64_t>();
        t.config_hash = j.at("config_hash").get<std::string>();
        t.plan_hash = j.at("plan_hash").get<std::string>();
        t.planning_time_s = j.at("planning_time_s").get<double>();
        t.goal_id = j.at("goal").get<std::string>();
      } catch (const nlohmann::json::exception& ex) {
        detail::malformed(line_no, std::string("bad header: ") + ex.what());
      }
      if (t.goal_id != goal.id) detail::malformed(line_no, "trace is for goal '" + t.goal_id + "', not '" + goal.id + "'");
      have_header = true;
      continue;
    }
    t.events.push_back(detail::event_from_json(j, goal, line_no));
  }
  if (!have_header) detail::malformed(1, "missing header");
  t.initial_state = io::initial_world_state(goal, layout, kStartPlace);
  t.final_state = fold_events(t.events, t.initial_state);
  return t;
}

/// Layout with slots p01..p15 and no beam slots; enough to replay any trace.
inline io::LayoutTemplate replay_layout() {
  io::LayoutTemplate l;
  for (std::size_t i = 0; i < kMaxPegs; ++i) l.peg_slots.push_back("h" + io::LayoutTemplate::peg_id(i).substr(1));
  return l;
}

/// Completion step function: the value at time 0, then one point per
/// peg_inserted event.
inline std::vector<TimelinePoint> replay(const std::vector<ExecutionEvent>& events, const GoalConfiguration& goal,
                                         const WorldState& initial) {
  std::vector<TimelinePoint> out;
  WorldState s = initial;
  SatisfactionReport r = satisfaction(s, goal);
  out.push_back({0.0, r.completion_pct, r.fastened_pegs});
  double last = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.t_s < last) detail::malformed(i + 2, "timestamp goes backwards");
    last = e.t_s;
    try {
      s = apply_event(s, e);
    } catch (const Error& err) {
      detail::malformed(i + 2, err.message());
    }
    if (auto bad = s.invariant_violation()) detail::malformed(i + 2, *bad);
    if (e.kind == EventKind::PegInserted) {
      r = satisfaction(s, goal);
      out.push_back({e.t_s, r.completion_pct, r.fastened_pegs});
    }
  }
  return out;
}

inline std::vector<TimelinePoint> replay(const ExecutionTrace& trace, const GoalConfiguration& goal) {
  return replay(trace.events, goal, trace.initial_state);
}

/// Value of a step function at time `t`.
inline double completion_at(const std::vector<TimelinePoint>& curve, double t) {
  double v = 0.0;
  for (const auto& p : curve) {
    if (p.t_s <= t) v = p.completion_pct;
    else break;
  }
  return v;
}

}  // namespace ramp::sim
