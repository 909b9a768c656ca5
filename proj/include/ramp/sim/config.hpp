#pragma once

// Skill models and simulator configuration, read from TOML.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ramp/core/world_state.hpp"
#include "ramp/error.hpp"
#include "toml.hpp"

namespace ramp::sim {

struct SkillModel {
  Skill skill = Skill::Move;
  double base_duration_s = 1.0;
  double duration_jitter_s = 0.0;  // half-width of the uniform jitter
  double success_prob = 1.0;
  int retries = 0;
  double retry_duration_s = 1.0;
  double retry_success_prob = 0.0;

  friend bool operator==(const SkillModel&, const SkillModel&) = default;
};

enum class FailurePropagation { Strict, Independent };

constexpr std::string_view to_string(FailurePropagation f) {
  return f == FailurePropagation::Strict ? "strict" : "independent";
}

inline constexpr double kDefaultPegDropProb = 0.5;

struct SimConfig {
  std::uint64_t seed = 0;
  std::map<Skill, SkillModel> models;
  std::optional<double> planning_time_override_s;
  FailurePropagation failure_propagation = FailurePropagation::Strict;
  double peg_drop_prob = kDefaultPegDropProb;

  const SkillModel& model(Skill s) const {
    auto it = models.find(s);
    if (it == models.end()) throw Error(ErrorCode::ConfigError, "no model for skill " + std::string(to_string(s)));
    return it->second;
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline bool has_retry_model(Skill s) { return s == Skill::Fasten || s == Skill::AssembleSquare; }

/// CONFIG_ERROR on the first violated constraint.
inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  auto prob = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  for (Skill s : kAllSkills) {
    auto it = c.models.find(s);
    if (it == c.models.end()) fail("missing [models." + std::string(to_string(s)) + "]");
    const SkillModel& m = it->second;
    const std::string name(to_string(s));
    if (m.skill != s) fail("model for " + name + " is labelled " + std::string(to_string(m.skill)));
    if (!std::isfinite(m.base_duration_s) || m.base_duration_s <= 0) fail(name + ".base_duration_s must be positive");
    if (!std::isfinite(m.duration_jitter_s) || m.duration_jitter_s < 0)
      fail(name + ".duration_jitter_s must be nonnegative");
    if (m.duration_jitter_s > m.base_duration_s) fail(name + ".duration_jitter_s exceeds base_duration_s");
    if (!prob(m.success_prob)) fail(name + ".success_prob must lie in [0, 1]");
    if (m.retries < 0) fail(name + ".retries must be >= 0");
    if (m.retries > 0 && !has_retry_model(s)) fail(name + " does not support retries");
    if (!std::isfinite(m.retry_duration_s) || m.retry_duration_s <= 0) fail(name + ".retry_duration_s must be positive");
    if (!prob(m.retry_success_prob)) fail(name + ".retry_success_prob must lie in [0, 1]");
  }
  if (c.planning_time_override_s &&
      (!std::isfinite(*c.planning_time_override_s) || *c.planning_time_override_s <= 0))
    fail("planning_time_override_s must be positive");
  if (!prob(c.peg_drop_prob)) fail("peg_drop_prob must lie in [0, 1]");
}

/// Every skill succeeds at its base duration, no jitter.
inline SimConfig ideal_config(std::uint64_t seed = 0, double duration_s = 1.0) {
  SimConfig c;
  c.seed = seed;
  for (Skill s : kAllSkills) {
    SkillModel m;
    m.skill = s;
    m.base_duration_s = duration_s;
    c.models.emplace(s, m);
  }
  return c;
}

namespace detail {

inline double number(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return *v;  // integers convert too
  throw Error(ErrorCode::ConfigError, where + " must be a number");
}

inline std::int64_t integer(const toml::node& n, const std::string& where) {
  if (n.is_integer()) return *n.value<std::int64_t>();
  throw Error(ErrorCode::ConfigError, where + " must be an integer");
}

}  // namespace detail

inline SimConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::ConfigError, msg.str());
  }
  SimConfig c;
  c.models.clear();
  for (auto&& [key, node] : root) {
    const std::string k(key.str());
    if (k == "seed") {
      std::int64_t v = detail::integer(node, k);
      if (v < 0) throw Error(ErrorCode::ConfigError, "seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (k == "failure_propagation") {
      auto v = node.value<std::string>();
      if (v == "strict") c.failure_propagation = FailurePropagation::Strict;
      else if (v == "independent") c.failure_propagation = FailurePropagation::Independent;
      else throw Error(ErrorCode::ConfigError, "failure_propagation must be \"strict\" or \"independent\"");
    } else if (k == "planning_time_override_s") {
      c.planning_time_override_s = detail::number(node, k);
    } else if (k == "peg_drop_prob") {
      c.peg_drop_prob = detail::number(node, k);
    } else if (k == "models") {
      const toml::table* models = node.as_table();
      if (!models) throw Error(ErrorCode::ConfigError, "models must be a table");
      for (auto&& [skill_key, model_node] : *models) {
        const std::string sk(skill_key.str());
        auto skill = skill_from_string(sk);
        if (!skill) throw Error(ErrorCode::ConfigError, "unknown skill [models." + sk + "]");
        const toml::table* t = model_node.as_table();
        if (!t) throw Error(ErrorCode::ConfigError, "models." + sk + " must be a table");
        SkillModel m;
        m.skill = *skill;
        bool has_base = false, has_prob = false;
        for (auto&& [field_key, v] : *t) {
          const std::string f(field_key.str());
          const std::string where = "models." + sk + "." + f;
          if (f == "base_duration_s") {
            m.base_duration_s = detail::number(v, where);
            has_base = true;
          } else if (f == "duration_jitter_s") {
            m.duration_jitter_s = detail::number(v, where);
          } else if (f == "success_prob") {
            m.success_prob = detail::number(v, where);
            has_prob = true;
          } else if (f == "retries") {
            std::int64_t r = detail::integer(v, where);
            if (r < 0 || r > 1000) throw Error(ErrorCode::ConfigError, where + " out of range");
            m.retries = static_cast<int>(r);
          } else if (f == "retry_duration_s") {
            m.retry_duration_s = detail::number(v, where);
          } else if (f == "retry_success_prob") {
            m.retry_success_prob = detail::number(v, where);
          } else {
            throw Error(ErrorCode::ConfigError, "unknown key " + where);
          }
        }
        if (!has_base) throw Error(ErrorCode::ConfigError, "models." + sk + " needs base_duration_s");
        if (!has_prob) throw Error(ErrorCode::ConfigError, "models." + sk + " needs success_prob");
        c.models[*skill] = m;
      }
    } else {
      throw Error(ErrorCode::ConfigError, "unknown key '" + k + "'");
    }
  }
  validate(c);
  return c;
}

/// Canonical JSON form; also the input of the config hash.
inline nlohmann::json config_to_json(const SimConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["failure_propagation"] = std::string(to_string(c.failure_propagation));
  j["peg_drop_prob"] = c.peg_drop_prob;
  j["planning_time_override_s"] = c.planning_time_override_s ? nlohmann::json(*c.planning_time_override_s) : nullptr;
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [s, m] : c.models) {
    models[std::string(to_string(s))] = {{"base_duration_s", m.base_duration_s},
                                          {"duration_jitter_s", m.duration_jitter_s},
                                          {"success_prob", m.success_prob},
                                          {"retries", m.retries},
                                          {"retry_duration_s", m.retry_duration_s},
                                          {"retry_success_prob", m.retry_success_prob}};
  }
  j["models"] = std::move(models);
  return j;
}

/// TOML text that parses back to `c`.
inline std::string config_to_toml(const SimConfig& c) {
  toml::table root;
  root.insert("seed", static_cast<std::int64_t>(c.seed));
  root.insert("failure_propagation", std::string(to_string(c.failure_propagation)));
  root.insert("peg_drop_prob", c.peg_drop_prob);
  if (c.planning_time_override_s) root.insert("planning_time_override_s", *c.planning_time_override_s);
  toml::table models;
  for (const auto& [s, m] : c.models) {
    toml::table t;
    t.insert("base_duration_s", m.base_duration_s);
    t.insert("duration_jitter_s", m.duration_jitter_s);
    t.insert("success_prob", m.success_prob);
    t.insert("retries", static_cast<std::int64_t>(m.retries));
    t.insert("retry_duration_s", m.retry_duration_s);
    t.insert("retry_success_prob", m.retry_success_prob);
    models.insert(std::string(to_string(s)), std::move(t));
  }
  root.insert("models", std::move(models));
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

inline std::string config_hash(const SimConfig& c) { return hex64(fnv1a(config_to_json(c).dump())); }

}  // namespace ramp::sim
