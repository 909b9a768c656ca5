#include <gtest/gtest.h>

#include <functional>
#include <regex>

#include "ramp/io/goal_io.hpp"
#include "support.hpp"

using namespace ramp;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("no error raised");
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  if (pos == std::string::npos) throw std::runtime_error("pattern not found: " + from);
  return s.replace(pos, from.size(), to);
}

const std::string& three_pegs_text() {
  static const std::string t = io::read_file(test::fixture("three_pegs.xml"));
  return t;
}

}  // namespace

TEST(ParseGoal, CraftedFixtureHasThreePegConnections) {
  GoalConfiguration g = io::parse_goal(three_pegs_text());
  EXPECT_EQ(g.id, "three-pegs");
  EXPECT_EQ(g.goal_class, GoalClass::Easy);
  EXPECT_EQ(g.connections.size(), 4u);
  EXPECT_EQ(g.peg_connection_count(), 3u);
  EXPECT_NE(g.find_connection({"b0", 0}, {"b1", 1}), nullptr);
  EXPECT_FALSE(g.find_connection({"b0", 3}, {"b4", 2})->requires_peg);
  ASSERT_EQ(g.beams.size(), 4u);
  EXPECT_EQ(g.beams.front().id, "b0");
  EXPECT_TRUE(g.beams.front().fixed);
}

TEST(ParseGoal, MissingClassIsSchemaError) {
  std::string t = replace_once(three_pegs_text(), " class=\"easy\"", "");
  EXPECT_EQ(code_of([&] { io::parse_goal(t); }), ErrorCode::SchemaError);
}

TEST(ParseGoal, ExtraneousAttributeIsSchemaError) {
  for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
           {"<assembly id", "<assembly colour=\"red\" id"},
           {"<beam id=\"b4\"", "<beam id=\"b4\" weight=\"2\""},
           {"<joint index=\"0\" kind=\"tab\"", "<joint index=\"0\" angle=\"90\" kind=\"tab\""},
           {"requires_peg=\"false\"", "requires_peg=\"false\" glue=\"true\""}}) {
    std::string t = replace_once(three_pegs_text(), from, to);
    EXPECT_EQ(code_of([&] { io::parse_goal(t); }), ErrorCode::SchemaError) << to;
  }
}

TEST(ParseGoal, UnknownElementIsSchemaError) {
  std::string t = replace_once(three_pegs_text(), "</assembly>", "  <note/>\n</assembly>");
  EXPECT_EQ(code_of([&] { io::parse_goal(t); }), ErrorCode::SchemaError);
}

TEST(ParseGoal, MalformedXmlReportsPosition) {
  std::string t = replace_once(three_pegs_text(), "</beam>\n  <beam id=\"b1\">", "</bem>\n  <beam id=\"b1\">");
  try {
    io::parse_goal(t);
    FAIL() << "expected PARSE_ERROR";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_TRUE(std::regex_search(e.message(), std::regex("[0-9]+:[0-9]+"))) << e.message();
  }
  EXPECT_EQ(code_of([] { io::parse_goal("<assembly id=\"x\" class=\"easy\">"); }), ErrorCode::ParseError);
}

TEST(ParseGoal, SemanticErrorsAreDelegated) {
  std::string t = replace_once(three_pegs_text(), " fixed=\"true\"", "");
  EXPECT_EQ(code_of([&] { io::parse_goal(t); }), ErrorCode::SemanticError);
}

TEST(SerializeGoal, RoundTripIdentity) {
  GoalConfiguration g = io::parse_goal(three_pegs_text());
  GoalConfiguration back = io::parse_goal(io::serialize_goal(g));
  EXPECT_EQ(back, g);
  for (const auto& goal : test::shipped_catalog().goals) EXPECT_EQ(io::parse_goal(io::serialize_goal(goal)), goal);
}

TEST(SerializeGoal, EqualGoalsGiveIdenticalBytes) {
  GoalConfiguration a = io::parse_goal(three_pegs_text());
  GoalConfiguration b = a;
  std::reverse(b.beams.begin(), b.beams.end());  // declaration order does not matter
  EXPECT_EQ(io::serialize_goal(a), io::serialize_goal(b));
  EXPECT_EQ(io::serialize_goal(a), io::serialize_goal(io::parse_goal(io::serialize_goal(a))));
}

TEST(SerializeGoal, ZeroConnectionsIsSemanticError) {
  GoalConfiguration g = io::parse_goal(three_pegs_text());
  g.connections.clear();
  EXPECT_EQ(code_of([&] { io::serialize_goal(g); }), ErrorCode::SemanticError);
}

TEST(SerializeGoal, ShippedEasy1MatchesGolden) {
  EXPECT_EQ(io::serialize_goal(test::shipped_goal("easy-1")), io::read_file(test::fixture("easy-1.golden.xml")));
}

TEST(LoadCatalog, ShippedCatalogShape) {
  const auto& cat = test::shipped_catalog();
  EXPECT_EQ(cat.beams.size(), 9u);
  EXPECT_EQ(cat.goals.size(), 9u);
  for (GoalClass c : {GoalClass::Easy, GoalClass::Medium, GoalClass::Hard}) EXPECT_EQ(cat.goals_of(c).size(), 3u);
  for (const auto& b : cat.beams) EXPECT_TRUE(cat.layout.slots.count(b.id)) << b.id;
  EXPECT_LE(cat.layout.peg_slots.size(), 15u);
  for (const auto& g : cat.goals) {
    EXPECT_TRUE(validate_goal(g, cat.beams).ok()) << g.id;
    EXPECT_GE(cat.layout.peg_slots.size(), g.peg_connection_count());
  }
}

TEST(LoadCatalog, EasyPegCountsInRange) {
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Easy)) {
    EXPECT_GE(g->peg_connection_count(), 3u) << g->id;
    EXPECT_LE(g->peg_connection_count(), 4u) << g->id;
  }
  for (const auto* g : test::shipped_catalog().goals_of(GoalClass::Medium)) {
    EXPECT_GE(g->peg_connection_count(), 4u) << g->id;
    EXPECT_LE(g->peg_connection_count(), 8u) << g->id;
  }
}

TEST(LoadCatalog, MissingHardGoalIsNamed) {
  const fs::path dir = test::temp_dir("catalog-missing");
  fs::copy(test::catalog_dir(), dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  fs::remove(dir / "goals" / "hard-2.xml");
  try {
    io::load_catalog(dir);
    FAIL() << "expected MISSING_FILE";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFile);
    EXPECT_NE(e.message().find("hard-2.xml"), std::string::npos) << e.message();
  }
}

TEST(LoadCatalog, BadGoalFileIsNamed) {
  const fs::path dir = test::temp_dir("catalog-bad");
  fs::copy(test::catalog_dir(), dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  io::write_file(dir / "goals" / "medium-1.xml", "<assembly");
  try {
    io::load_catalog(dir);
    FAIL() << "expected PARSE_ERROR";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(e.message().find("medium-1.xml"), std::string::npos) << e.message();
  }
}

TEST(Layout, InitialStateFromLayout) {
  const auto& cat = test::shipped_catalog();
  const auto& g = test::shipped_goal("easy-1");
  WorldState s = io::initial_world_state(g, cat.layout, "home");
  EXPECT_EQ(s.peg_at.size(), cat.layout.peg_slots.size());
  EXPECT_EQ(s.beam_at.at("b0").where, BeamStatus::Where::Assembled);
  EXPECT_EQ(s.beam_at.at("b1").where, BeamStatus::Where::OnTemplate);
  EXPECT_EQ(s.beam_at.at("b1").slot, cat.layout.slots.at("b1"));
  EXPECT_FALSE(s.invariant_violation());
}
