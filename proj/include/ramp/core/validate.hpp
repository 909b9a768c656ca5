#pragma once

#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/core/types.hpp"

namespace ramp {

inline constexpr std::size_t kMaxPegs = 15;

enum class ValidationCode {
  UnknownBeam,
  DuplicateBeam,
  BeamMismatch,
  InvalidBeam,
  UnknownJoint,
  SameBeam,
  KindMismatch,
  MissingPegHole,
  JointReused,
  Disconnected,
  NoFixedBeam,
  MultipleFixed,
  ClassRange,
  TooManyPegs,
};

constexpr std::string_view to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::UnknownBeam: return "UNKNOWN_BEAM";
    case ValidationCode::DuplicateBeam: return "DUPLICATE_BEAM";
    case ValidationCode::BeamMismatch: return "BEAM_MISMATCH";
    case ValidationCode::InvalidBeam: return "INVALID_BEAM";
    case ValidationCode::UnknownJoint: return "UNKNOWN_JOINT";
    case ValidationCode::SameBeam: return "SAME_BEAM";
    case ValidationCode::KindMismatch: return "KIND_MISMATCH";
    case ValidationCode::MissingPegHole: return "MISSING_PEG_HOLE";
    case ValidationCode::JointReused: return "JOINT_REUSED";
    case ValidationCode::Disconnected: return "DISCONNECTED";
    case ValidationCode::NoFixedBeam: return "NO_FIXED_BEAM";
    case ValidationCode::MultipleFixed: return "MULTIPLE_FIXED";
    case ValidationCode::ClassRange: return "CLASS_RANGE";
    case ValidationCode::TooManyPegs: return "TOO_MANY_PEGS";
  }
  return "?";
}

struct ValidationIssue {
  ValidationCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;

  bool ok() const { return errors.empty(); }
  bool has(ValidationCode code) const {
    for (const auto& e : errors)
      if (e.code == code) return true;
    return false;
  }
  std::string summary() const {
    std::string out;
    for (const auto& e : errors) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(e.code)) + ": " + e.message;
    }
    return out;
  }
};

/// Peg-requiring connection range allowed for a goal class.
struct PegRange {
  std::size_t min = 0;
  std::size_t max = kMaxPegs;
};

constexpr PegRange peg_range(GoalClass c) {
  switch (c) {
    case GoalClass::Easy: return {3, 4};
    case GoalClass::Medium: return {4, 8};
    case GoalClass::Hard: return {0, std::numeric_limits<std::size_t>::max()};  // peg supply is checked separately
  }
  return {};
}

/// Structural checks on a single beam: at least two joints, distinct indices.
inline void validate_beam(const BeamSpec& beam, ValidationReport& report) {
  if (beam.joints.size() < 2) {
    report.errors.push_back({ValidationCode::InvalidBeam,
                             "beam '" + beam.id + "' has fewer than 2 joints"});
  }
  std::set<int> seen;
  for (const auto& j : beam.joints) {
    if (j.index < 0 || !seen.insert(j.index).second) {
      report.errors.push_back({ValidationCode::InvalidBeam,
                               "beam '" + beam.id + "' has invalid or repeated joint index " +
                                   std::to_string(j.index)});
    }
  }
}

/// Checks every goal invariant against the catalog beams. Issues are itemized
/// in a deterministic order; an empty report means the goal is valid.
inline ValidationReport validate_goal(const GoalConfiguration& goal,
                                      std::span<const BeamSpec> catalog) {
  ValidationReport report;
  auto add = [&](ValidationCode code, std::string msg) {
    report.errors.push_back({code, std::move(msg)});
  };

  if (catalog.empty()) {
    add(ValidationCode::UnknownBeam, "catalog is empty");
    return report;
  }
  std::map<std::string, const BeamSpec*> by_id;
  for (const auto& b : catalog) by_id.emplace(b.id, &b);

  std::map<std::string, const BeamSpec*> goal_beams;
  for (const auto& b : goal.beams) {
    if (!goal_beams.emplace(b.id, &b).second) {
      add(ValidationCode::DuplicateBeam, "beam '" + b.id + "' declared twice");
      continue;
    }
    auto it = by_id.find(b.id);
    if (it == by_id.end()) {
      add(ValidationCode::UnknownBeam, "beam '" + b.id + "' is not in the catalog");
      continue;
    }
    validate_beam(b, report);
    const BeamSpec& cat = *it->second;
    if (cat.fixed != b.fixed) {
      add(ValidationCode::BeamMismatch, "beam '" + b.id + "' fixed flag differs from catalog");
    }
    // Joints listed in the goal must agree with the catalog definition.
    for (const auto& j : b.joints) {
      const JointSpec* cj = cat.joint(j.index);
      if (cj == nullptr || !(*cj == j)) {
        add(ValidationCode::BeamMismatch, "joint " + std::to_string(j.index) + " of beam '" +
                                              b.id + "' differs from catalog");
      }
    }
  }

  // Resolves a joint reference against the goal's beam, falling back to the
  // catalog definition when the goal omits joint detail.
  auto resolve = [&](const JointRef& r) -> const JointSpec* {
    auto git = goal_beams.find(r.beam);
    if (git == goal_beams.end()) return nullptr;
    if (const JointSpec* j = git->second->joint(r.joint)) return j;
    auto cit = by_id.find(r.beam);
    return cit == by_id.end() ? nullptr : cit->second->joint(r.joint);
  };

  std::set<JointRef> used_joints;
  for (const auto& c : goal.connections) {
    const std::string name = to_string(c);
    bool refs_ok = true;
    for (const JointRef* r : {&c.joint_a, &c.joint_b}) {
      if (!goal_beams.count(r->beam)) {
        add(ValidationCode::UnknownBeam,
            "connection " + name + " references beam '" + r->beam + "' not declared in the goal");
        refs_ok = false;
      } else if (resolve(*r) == nullptr) {
        add(ValidationCode::UnknownJoint, "connection " + name + " references missing joint " +
                                              to_string(*r));
        refs_ok = false;
      }
    }
    if (c.joint_a.beam == c.joint_b.beam) {
      add(ValidationCode::SameBeam, "connection " + name + " joins a beam to itself");
      continue;
    }
    if (!refs_ok) continue;
    const JointSpec* ja = resolve(c.joint_a);
    const JointSpec* jb = resolve(c.joint_b);
    if (!kinds_compatible(ja->kind, jb->kind)) {
      add(ValidationCode::KindMismatch, "connection " + name + " pairs " +
                                            std::string(to_string(ja->kind)) + " with " +
                                            std::string(to_string(jb->kind)));
    }
    if (c.requires_peg && !(ja->peg_hole && jb->peg_hole)) {
      add(ValidationCode::MissingPegHole, "connection " + name + " requires a peg but a joint has no peg hole");
    }
    for (const JointRef* r : {&c.joint_a, &c.joint_b}) {
      if (!used_joints.insert(*r).second) {
        add(ValidationCode::JointReused, "joint " + to_string(*r) + " is used by more than one connection");
      }
    }
  }

  // Fixed beam: exactly one.
  std::vector<std::string> fixed;
  for (const auto& b : goal.beams)
    if (b.fixed) fixed.push_back(b.id);
  if (fixed.empty()) add(ValidationCode::NoFixedBeam, "goal has no fixed beam");
  if (fixed.size() > 1) add(ValidationCode::MultipleFixed, "goal has more than one fixed beam");

  // Connectivity over the goal's beams, starting from the fixed beam.
  if (goal.connections.empty()) {
    add(ValidationCode::Disconnected, "goal has no connections");
  } else if (!goal_beams.empty()) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& c : goal.connections) {
      adj[c.joint_a.beam].insert(c.joint_b.beam);
      adj[c.joint_b.beam].insert(c.joint_a.beam);
    }
    const std::string start = fixed.empty() ? goal_beams.begin()->first : fixed.front();
    std::set<std::string> seen{start};
    std::vector<std::string> stack{start};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      for (const auto& n : adj[cur])
        if (seen.insert(n).second) stack.push_back(n);
    }
    for (const auto& [id, _] : goal_beams) {
      if (!seen.count(id)) {
        add(ValidationCode::Disconnected, "beam '" + id + "' is not connected to the fixed beam");
      }
    }
  }

  const std::size_t pegs = goal.peg_connection_count();
  const PegRange range = peg_range(goal.goal_class);
  if (pegs < range.min || pegs > range.max) {
    add(ValidationCode::ClassRange,
        std::string(to_string(goal.goal_class)) + " goal needs " + std::to_string(range.min) + "-" +
            std::to_string(range.max) + " peg-requiring connections, found " + std::to_string(pegs));
  }
  if (pegs > kMaxPegs) {
    add(ValidationCode::TooManyPegs,
        "goal needs " + std::to_string(pegs) + " pegs, at most " + std::to_string(kMaxPegs) + " exist");
  }
  return report;
}

}  // namespace ramp
