#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/error.hpp"

namespace ramp {

enum class JointKind { Socket, Tab, Cap };

constexpr std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::Socket: return "socket";
    case JointKind::Tab: return "tab";
    case JointKind::Cap: return "cap";
  }
  return "?";
}

inline std::optional<JointKind> joint_kind_from_string(std::string_view s) {
  if (s == "socket") return JointKind::Socket;
  if (s == "tab") return JointKind::Tab;
  if (s == "cap") return JointKind::Cap;
  return std::nullopt;
}

/// Two joint kinds can mate when a tab goes into a socket (square insertion)
/// or a cap goes over a tab (capping).
constexpr bool kinds_compatible(JointKind a, JointKind b) {
  auto pair = [&](JointKind x, JointKind y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  return pair(JointKind::Tab, JointKind::Socket) ||
         pair(JointKind::Tab, JointKind::Cap);
}

enum class GoalClass { Easy, Medium, Hard };

constexpr std::string_view to_string(GoalClass c) {
  switch (c) {
    case GoalClass::Easy: return "easy";
    case GoalClass::Medium: return "medium";
    case GoalClass::Hard: return "hard";
  }
  return "?";
}

inline std::optional<GoalClass> goal_class_from_string(std::string_view s) {
  if (s == "easy") return GoalClass::Easy;
  if (s == "medium") return GoalClass::Medium;
  if (s == "hard") return GoalClass::Hard;
  return std::nullopt;
}

struct JointSpec {
  int index = 0;
  JointKind kind = JointKind::Socket;
  bool peg_hole = false;

  friend bool operator==(const JointSpec&, const JointSpec&) = default;
};

struct BeamSpec {
  std::string id;
  std::vector<JointSpec> joints;
  bool fixed = false;

  const JointSpec* joint(int index) const {
    for (const auto& j : joints)
      if (j.index == index) return &j;
    return nullptr;
  }

  friend bool operator==(const BeamSpec&, const BeamSpec&) = default;
};

struct JointRef {
  std::string beam;
  int joint = 0;

  friend auto operator<=>(const JointRef&, const JointRef&) = default;
  friend bool operator==(const JointRef&, const JointRef&) = default;
};

inline std::string to_string(const JointRef& r) {
  return r.beam + "." + std::to_string(r.joint);
}

/// A goal connection. Construct via make_connection() to keep the two joint
/// references in canonical order (joint_a < joint_b).
struct Connection {
  JointRef joint_a;
  JointRef joint_b;
  bool requires_peg = false;

  bool involves(std::string_view beam) const {
    return joint_a.beam == beam || joint_b.beam == beam;
  }
  /// Pair identity, ignoring the peg flag.
  bool same_joints(const Connection& o) const {
    return joint_a == o.joint_a && joint_b == o.joint_b;
  }

  friend auto operator<=>(const Connection&, const Connection&) = default;
  friend bool operator==(const Connection&, const Connection&) = default;
};

inline Connection make_connection(JointRef a, JointRef b, bool requires_peg) {
  if (b < a) std::swap(a, b);
  return Connection{std::move(a), std::move(b), requires_peg};
}

inline std::string to_string(const Connection& c) {
  return to_string(c.joint_a) + "-" + to_string(c.joint_b);
}

struct GoalConfiguration {
  std::string id;
  GoalClass goal_class = GoalClass::Easy;
  /// Beams as declared in the goal file, sorted by id.
  std::vector<BeamSpec> beams;
  std::set<Connection> connections;

  std::set<std::string> beams_used() const {
    std::set<std::string> ids;
    for (const auto& b : beams) ids.insert(b.id);
    return ids;
  }

  const BeamSpec* beam(std::string_view beam_id) const {
    for (const auto& b : beams)
      if (b.id == beam_id) return &b;
    return nullptr;
  }

  std::size_t peg_connection_count() const {
    std::size_t n = 0;
    for (const auto& c : connections) n += c.requires_peg ? 1 : 0;
    return n;
  }

  const Connection* find_connection(const JointRef& a, const JointRef& b) const {
    for (const auto& c : connections) {
      if ((c.joint_a == a && c.joint_b == b) || (c.joint_a == b && c.joint_b == a))
        return &c;
    }
    return nullptr;
  }

  friend bool operator==(const GoalConfiguration&, const GoalConfiguration&) = default;
};

/// Identifiers used in goal files and catalogs: ASCII [a-z0-9_-]+.
inline bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace ramp
