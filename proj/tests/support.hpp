#pragma once

// Shared fixtures for the unit tests.

#include <filesystem>
#include <string>

#include "ramp/io/goal_io.hpp"

#ifndef RAMP_SOURCE_DIR
#define RAMP_SOURCE_DIR "."
#endif

namespace ramp::test {

inline std::filesystem::path source_dir() { return RAMP_SOURCE_DIR; }
inline std::filesystem::path catalog_dir() { return source_dir() / "catalog"; }
inline std::filesystem::path domains_dir() { return source_dir() / "domains"; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

inline const io::AssemblyCatalog& shipped_catalog() {
  static const io::AssemblyCatalog cat = io::load_catalog(catalog_dir());
  return cat;
}

inline const GoalConfiguration& shipped_goal(const std::string& id) {
  const GoalConfiguration* g = shipped_catalog().goal(id);
  if (!g) throw std::runtime_error("no goal " + id);
  return *g;
}

inline BeamSpec beam(std::string id, std::initializer_list<JointKind> kinds, bool fixed = false) {
  BeamSpec b;
  b.id = std::move(id);
  b.fixed = fixed;
  int i = 0;
  for (JointKind k : kinds) b.joints.push_back({i++, k, true});
  return b;
}

inline Connection conn(const std::string& a, int ja, const std::string& b, int jb, bool peg = true) {
  return make_connection({a, ja}, {b, jb}, peg);
}

inline std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ramp-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace ramp::test
