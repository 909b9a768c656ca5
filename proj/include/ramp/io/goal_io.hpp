#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/core/types.hpp"
#include "ramp/core/validate.hpp"
#include "ramp/core/world_state.hpp"
#include "ramp/error.hpp"
#include "ramp/io/xml.hpp"

namespace ramp::io {

namespace detail {

[[noreturn]] inline void schema_error(const XmlElement& el, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, to_string(el.pos) + ": <" + el.name + "> " + msg);
}

inline void check_attributes(const XmlElement& el, std::initializer_list<std::string_view> required,
                             std::initializer_list<std::string_view> optional = {}) {
  for (const auto& [key, _] : el.attributes) {
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) schema_error(el, "has unknown attribute '" + key + "'");
  }
  for (auto key : required) {
    if (el.attribute(key) == nullptr) schema_error(el, "is missing required attribute '" + std::string(key) + "'");
  }
}

inline void check_no_children(const XmlElement& el) {
  if (!el.children.empty()) schema_error(el.children.front(), "is not allowed inside <" + el.name + ">");
}

inline std::string identifier_attr(const XmlElement& el, std::string_view key) {
  const std::string& v = *el.attribute(key);
  if (!is_valid_identifier(v)) schema_error(el, "attribute '" + std::string(key) + "' is not a valid identifier: '" + v + "'");
  return v;
}

inline bool bool_attr(const XmlElement& el, std::string_view key, bool fallback = false) {
  const std::string* v = el.attribute(key);
  if (v == nullptr) return fallback;
  if (*v == "true") return true;
  if (*v == "false") return false;
  schema_error(el, "attribute '" + std::string(key) + "' must be true or false");
}

inline int int_attr(const XmlElement& el, std::string_view key) {
  const std::string& v = *el.attribute(key);
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out < 0)
    schema_error(el, "attribute '" + std::string(key) + "' must be a non-negative integer");
  return out;
}

inline JointSpec parse_joint(const XmlElement& el) {
  check_attributes(el, {"index", "kind", "peg_hole"});
  check_no_children(el);
  JointSpec j;
  j.index = int_attr(el, "index");
  auto kind = joint_kind_from_string(*el.attribute("kind"));
  if (!kind) schema_error(el, "has unknown joint kind '" + *el.attribute("kind") + "'");
  j.kind = *kind;
  j.peg_hole = bool_attr(el, "peg_hole");
  return j;
}

inline BeamSpec parse_beam(const XmlElement& el) {
  check_attributes(el, {"id"}, {"fixed"});
  BeamSpec b;
  b.id = identifier_attr(el, "id");
  b.fixed = bool_attr(el, "fixed");
  for (const auto& child : el.children) {
    if (child.name != "joint") schema_error(child, "is not allowed inside <beam>");
    b.joints.push_back(parse_joint(child));
  }
  std::sort(b.joints.begin(), b.joints.end(),
            [](const JointSpec& x, const JointSpec& y) { return x.index < y.index; });
  return b;
}

inline Connection parse_connection(const XmlElement& el) {
  check_attributes(el, {"beam_a", "joint_a", "beam_b", "joint_b", "requires_peg"});
  check_no_children(el);
  return make_connection(JointRef{identifier_attr(el, "beam_a"), int_attr(el, "joint_a")},
                         JointRef{identifier_attr(el, "beam_b"), int_attr(el, "joint_b")},
                         bool_attr(el, "requires_peg"));
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

inline void write_beam(std::ostringstream& out, const BeamSpec& b, const std::string& indent) {
  out << indent << "<beam id=\"" << xml_escape(b.id) << "\"";
  if (b.fixed) out << " fixed=\"true\"";
  if (b.joints.empty()) {
    out << "/>\n";
    return;
  }
  out << ">\n";
  std::vector<JointSpec> joints = b.joints;
  std::sort(joints.begin(), joints.end(),
            [](const JointSpec& x, const JointSpec& y) { return x.index < y.index; });
  for (const auto& j : joints) {
    out << indent << "  <joint index=\"" << j.index << "\" kind=\"" << to_string(j.kind)
        << "\" peg_hole=\"" << bool_str(j.peg_hole) << "\"/>\n";
  }
  out << indent << "</beam>\n";
}

}  // namespace detail

/// Parses a goal file. Unknown elements or attributes are schema errors; the
/// goal is then validated against its own beam declarations.
inline GoalConfiguration parse_goal(const std::string& text) {
  using detail::schema_error;
  XmlElement root = parse_xml(text);
  if (root.name != "assembly") schema_error(root, "unexpected root element (expected <assembly>)");
  detail::check_attributes(root, {"id", "class"});
  GoalConfiguration goal;
  goal.id = detail::identifier_attr(root, "id");
  auto cls = goal_class_from_string(*root.attribute("class"));
  if (!cls) schema_error(root, "has unknown class '" + *root.attribute("class") + "'");
  goal.goal_class = *cls;
  for (const auto& child : root.children) {
    if (child.name == "beam") {
      goal.beams.push_back(detail::parse_beam(child));
    } else if (child.name == "connection") {
      Connection c = detail::parse_connection(child);
      for (const auto& existing : goal.connections) {
        if (existing.same_joints(c)) schema_error(child, "duplicates connection " + to_string(c));
      }
      goal.connections.insert(std::move(c));
    } else {
      schema_error(child, "is not allowed inside <assembly>");
    }
  }
  std::sort(goal.beams.begin(), goal.beams.end(),
            [](const BeamSpec& a, const BeamSpec& b) { return a.id < b.id; });
  ValidationReport report = validate_goal(goal, goal.beams);
  if (!report.ok()) throw Error(ErrorCode::SemanticError, "goal '" + goal.id + "': " + report.summary());
  return goal;
}

/// Canonical goal serialization: beams by id, joints by index, connections in
/// lexicographic order, two-space indentation, LF line endings.
inline std::string serialize_goal(const GoalConfiguration& goal) {
  ValidationReport report = validate_goal(goal, goal.beams);
  if (!report.ok()) throw Error(ErrorCode::SemanticError, "goal '" + goal.id + "': " + report.summary());
  std::vector<BeamSpec> beams = goal.beams;
  std::sort(beams.begin(), beams.end(), [](const BeamSpec& a, const BeamSpec& b) { return a.id < b.id; });
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<assembly id=\"" << xml_escape(goal.id) << "\" class=\"" << to_string(goal.goal_class) << "\">\n";
  for (const auto& b : beams) detail::write_beam(out, b, "  ");
  for (const auto& c : goal.connections) {
    out << "  <connection beam_a=\"" << xml_escape(c.joint_a.beam) << "\" joint_a=\"" << c.joint_a.joint
        << "\" beam_b=\"" << xml_escape(c.joint_b.beam) << "\" joint_b=\"" << c.joint_b.joint
        << "\" requires_peg=\"" << detail::bool_str(c.requires_peg) << "\"/>\n";
  }
  out << "</assembly>\n";
  return out.str();
}

/// Parses `beams.xml`: a <beams> root holding <beam> elements.
inline std::vector<BeamSpec> parse_beams(const std::string& text) {
  XmlElement root = parse_xml(text);
  if (root.name != "beams") detail::schema_error(root, "unexpected root element (expected <beams>)");
  detail::check_attributes(root, {});
  std::vector<BeamSpec> beams;
  for (const auto& child : root.children) {
    if (child.name != "beam") detail::schema_error(child, "is not allowed inside <beams>");
    beams.push_back(detail::parse_beam(child));
  }
  std::sort(beams.begin(), beams.end(), [](const BeamSpec& a, const BeamSpec& b) { return a.id < b.id; });
  return beams;
}

struct LayoutTemplate {
  std::map<std::string, std::string> slots;  // beam id -> slot id
  std::vector<std::string> peg_slots;

  /// Pegs are named after their holder slot order: p01, p02, ...
  static std::string peg_id(std::size_t ordinal) {
    std::string n = std::to_string(ordinal + 1);
    return "p" + std::string(n.size() < 2 ? 2 - n.size() : 0, '0') + n;
  }
  std::vector<std::string> peg_ids() const {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < peg_slots.size(); ++i) ids.push_back(peg_id(i));
    return ids;
  }
};

/// Parses `layout.xml`: <layout> with <slot beam id/> and <peg_slot id/>.
inline LayoutTemplate parse_layout(const std::string& text) {
  XmlElement root = parse_xml(text);
  if (root.name != "layout") detail::schema_error(root, "unexpected root element (expected <layout>)");
  detail::check_attributes(root, {});
  LayoutTemplate layout;
  std::set<std::string> slot_ids;
  for (const auto& child : root.children) {
    detail::check_no_children(child);
    if (child.name == "slot") {
      detail::check_attributes(child, {"beam", "id"});
      std::string beam = detail::identifier_attr(child, "beam");
      std::string id = detail::identifier_attr(child, "id");
      if (!slot_ids.insert(id).second) detail::schema_error(child, "reuses slot id '" + id + "'");
      if (!layout.slots.emplace(beam, id).second) detail::schema_error(child, "assigns a second slot to beam '" + beam + "'");
    } else if (child.name == "peg_slot") {
      detail::check_attributes(child, {"id"});
      std::string id = detail::identifier_attr(child, "id");
      if (!slot_ids.insert(id).second) detail::schema_error(child, "reuses slot id '" + id + "'");
      layout.peg_slots.push_back(id);
    } else {
      detail::schema_error(child, "is not allowed inside <layout>");
    }
  }
  return layout;
}

struct AssemblyCatalog {
  std::vector<BeamSpec> beams;
  std::vector<GoalConfiguration> goals;  // ordered easy-1..hard-3
  LayoutTemplate layout;

  const GoalConfiguration* goal(std::string_view id) const {
    for (const auto& g : goals)
      if (g.id == id) return &g;
    return nullptr;
  }
  std::vector<const GoalConfiguration*> goals_of(GoalClass c) const {
    std::vector<const GoalConfiguration*> out;
    for (const auto& g : goals)
      if (g.goal_class == c) out.push_back(&g);
    return out;
  }
  const BeamSpec* beam(std::string_view id) const {
    for (const auto& b : beams)
      if (b.id == id) return &b;
    return nullptr;
  }
};

inline constexpr std::size_t kCatalogBeams = 9;
inline constexpr std::size_t kGoalsPerClass = 3;

inline std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

/// Checks the catalog-level invariants: beam count, goals per class, layout
/// coverage, and every goal validating against the catalog beams.
inline void check_catalog(const AssemblyCatalog& cat) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::SemanticError, msg); };
  if (cat.beams.size() != kCatalogBeams)
    fail("catalog has " + std::to_string(cat.beams.size()) + " beams, expected 9");
  std::set<std::string> ids;
  std::size_t fixed = 0;
  for (const auto& b : cat.beams) {
    if (!ids.insert(b.id).second) fail("duplicate beam id '" + b.id + "'");
    ValidationReport r;
    validate_beam(b, r);
    if (!r.ok()) fail(r.summary());
    fixed += b.fixed ? 1 : 0;
  }
  if (fixed != 1) fail("catalog must contain exactly one fixed beam");
  for (GoalClass c : {GoalClass::Easy, GoalClass::Medium, GoalClass::Hard}) {
    if (cat.goals_of(c).size() != kGoalsPerClass)
      fail("catalog needs exactly 3 " + std::string(to_string(c)) + " goals");
  }
  for (const auto& b : cat.beams) {
    if (!cat.layout.slots.count(b.id)) fail("layout has no slot for beam '" + b.id + "'");
  }
  for (const auto& [beam, _] : cat.layout.slots) {
    if (!ids.count(beam)) fail("layout slot for unknown beam '" + beam + "'");
  }
  std::size_t max_pegs = 0;
  for (const auto& g : cat.goals) max_pegs = std::max(max_pegs, g.peg_connection_count());
  if (cat.layout.peg_slots.size() < max_pegs || cat.layout.peg_slots.size() > kMaxPegs)
    fail("layout must provide between " + std::to_string(max_pegs) + " and 15 peg slots");
  for (const auto& g : cat.goals) {
    ValidationReport r = validate_goal(g, cat.beams);
    if (!r.ok()) fail("goal '" + g.id + "': " + r.summary());
  }
}

inline std::vector<std::string> catalog_goal_files() {
  std::vector<std::string> files;
  for (const char* cls : {"easy", "medium", "hard"})
    for (int i = 1; i <= 3; ++i) files.push_back(std::string("goals/") + cls + "-" + std::to_string(i) + ".xml");
  return files;
}

/// Loads `beams.xml`, `layout.xml` and the nine goal files from `dir`.
/// Errors name the offending file.
inline AssemblyCatalog load_catalog(const std::filesystem::path& dir) {
  auto load = [&](const std::string& rel, auto&& parse) {
    const std::filesystem::path path = dir / rel;
    std::string text = read_file(path);
    try {
      return parse(text);
    } catch (const Error& e) {
      throw Error(e.code(), rel + ": " + e.message());
    }
  };
  for (const auto& rel : [] {
         std::vector<std::string> all{"beams.xml", "layout.xml"};
         for (auto& f : catalog_goal_files()) all.push_back(f);
         return all;
       }()) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(dir / rel, ec))
      throw Error(ErrorCode::MissingFile, (dir / rel).string());
  }
  AssemblyCatalog cat;
  cat.beams = load("beams.xml", parse_beams);
  cat.layout = load("layout.xml", parse_layout);
  for (const auto& rel : catalog_goal_files()) {
    GoalConfiguration g = load(rel, parse_goal);
    const std::string stem = std::filesystem::path(rel).stem().string();
    if (g.id != stem) throw Error(ErrorCode::SemanticError, rel + ": goal id '" + g.id + "' does not match file name");
    if (stem.rfind(std::string(to_string(g.goal_class)) + "-", 0) != 0)
      throw Error(ErrorCode::SemanticError, rel + ": class '" + std::string(to_string(g.goal_class)) + "' does not match file name");
    ValidationReport r = validate_goal(g, cat.beams);
    if (!r.ok()) throw Error(ErrorCode::SemanticError, rel + ": " + r.summary());
    cat.goals.push_back(std::move(g));
  }
  check_catalog(cat);
  return cat;
}

/// Start-of-trial world state: the fixed beam assembled, every other goal
/// beam on its template slot, all pegs in their holders, hand empty.
inline WorldState initial_world_state(const GoalConfiguration& goal, const LayoutTemplate& layout,
                                      const std::string& robot_loc) {
  WorldState s;
  for (const auto& b : goal.beams) {
    BeamStatus status;
    auto it = layout.slots.find(b.id);
    status.slot = it == layout.slots.end() ? std::string() : it->second;
    status.where = b.fixed ? BeamStatus::Where::Assembled : BeamStatus::Where::OnTemplate;
    s.beam_at.emplace(b.id, status);
  }
  for (std::size_t i = 0; i < layout.peg_slots.size(); ++i) {
    PegStatus p;
    p.slot = layout.peg_slots[i];
    s.peg_at.emplace(LayoutTemplate::peg_id(i), p);
  }
  s.robot_loc = robot_loc;
  return s;
}

}  // namespace ramp::io
