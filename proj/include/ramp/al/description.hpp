#pragma once

// Abstract syntax and parser for system descriptions written in a small
// AL_d-style action language:
//
//   sorts:      thing.  robot < thing.  place = {a, b}.
//   statics:    next_to(place, place).
//   fluents:    loc(thing, place).
//   actions:    move(robot, place).
//   axioms:     move(R, P) causes loc(R, P).
//               loc(O, P) if loc(R, P), in_hand(R, O).
//               impossible pick_up(R, O) if in_hand(R, O).
//
// Variables start uppercase, constants lowercase, `-` negates a literal,
// `%` starts a comment. Bodies may also hold `X != Y` / `X = Y` guards.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ramp/error.hpp"

namespace ramp::al {

struct SourcePos {
  int line = 1;
  int column = 1;
};

inline std::string to_string(const SourcePos& p) {
  return std::to_string(p.line) + ":" + std::to_string(p.column);
}

enum class Resolution { Coarse, Fine };

constexpr std::string_view to_string(Resolution r) {
  return r == Resolution::Coarse ? "coarse" : "fine";
}

enum class Role { Static, Fluent, Action };

struct Term {
  bool variable = false;
  std::string name;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  SourcePos pos;
};

struct Literal {
  Atom atom;
  bool negated = false;
};

/// `lhs != rhs` or `lhs = rhs` guard in an axiom body.
struct Guard {
  Term lhs;
  Term rhs;
  bool equal = false;
};

enum class AxiomKind { CausalLaw, StateConstraint, Executability };

constexpr std::string_view to_string(AxiomKind k) {
  switch (k) {
    case AxiomKind::CausalLaw: return "causal_law";
    case AxiomKind::StateConstraint: return "state_constraint";
    case AxiomKind::Executability: return "executability";
  }
  return "?";
}

struct Axiom {
  AxiomKind kind = AxiomKind::StateConstraint;
  std::optional<Literal> head;   // absent for executability conditions
  std::optional<Atom> trigger;   // action atom for causal laws and executability
  std::vector<Literal> body;
  std::vector<Guard> guards;
  std::map<std::string, std::string> variable_sorts;  // filled by the checker
  SourcePos pos;
};

struct SortDecl {
  std::string name;
  std::optional<std::string> parent;
  std::vector<std::string> constants;
  SourcePos pos;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_sorts;
  Role role = Role::Fluent;
  SourcePos pos;
};

struct SystemDescription {
  Resolution resolution = Resolution::Coarse;
  std::vector<SortDecl> sorts;
  std::vector<PredicateDecl> statics;
  std::vector<PredicateDecl> fluents;
  std::vector<PredicateDecl> actions;
  std::vector<Axiom> axioms;

  const SortDecl* sort(std::string_view name) const {
    for (const auto& s : sorts)
      if (s.name == name) return &s;
    return nullptr;
  }

  bool is_leaf(std::string_view name) const {
    for (const auto& s : sorts)
      if (s.parent && *s.parent == name) return false;
    return true;
  }

  /// True when `sub` equals `super` or descends from it.
  bool is_subsort(std::string_view sub, std::string_view super) const {
    std::string cur(sub);
    for (std::size_t guard = 0; guard <= sorts.size(); ++guard) {
      if (cur == super) return true;
      const SortDecl* s = sort(cur);
      if (s == nullptr || !s->parent) return false;
      cur = *s->parent;
    }
    return false;
  }

  std::vector<std::string> children(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& s : sorts)
      if (s.parent && *s.parent == name) out.push_back(s.name);
    return out;
  }

  const PredicateDecl* predicate(std::string_view name) const {
    for (const auto* group : {&statics, &fluents, &actions})
      for (const auto& p : *group)
        if (p.name == name) return &p;
    return nullptr;
  }

  /// Leaf sort declared for a constant written in the file, if any.
  std::optional<std::string> constant_sort(std::string_view constant) const {
    for (const auto& s : sorts)
      for (const auto& c : s.constants)
        if (c == constant) return s.name;
    return std::nullopt;
  }

  std::size_t count(AxiomKind k) const {
    return static_cast<std::size_t>(
        std::count_if(axioms.begin(), axioms.end(), [&](const Axiom& a) { return a.kind == k; }));
  }
};

namespace detail {

enum class Tok { Ident, Var, LParen, RParen, LBrace, RBrace, Comma, Dot, Colon, Minus, Lt, Eq, Neq, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  SourcePos pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '%' || c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.pos = pos;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::Var : Tok::Ident;
      if (c == '_') throw Error(ErrorCode::ParseError, to_string(pos) + ": identifiers may not start with '_'");
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      // Constants such as `b1` start with a letter; bare numbers are not terms.
      throw Error(ErrorCode::ParseError, to_string(pos) + ": unexpected digit");
    }
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case ',': t.kind = Tok::Comma; break;
      case '.': t.kind = Tok::Dot; break;
      case ':': t.kind = Tok::Colon; break;
      case '-': t.kind = Tok::Minus; break;
      case '<': t.kind = Tok::Lt; break;
      case '=': t.kind = Tok::Eq; break;
      case '!':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          t.kind = Tok::Neq;
          t.text = "!=";
          advance(2);
          out.push_back(std::move(t));
          continue;
        }
        throw Error(ErrorCode::ParseError, to_string(pos) + ": expected '!='");
      default:
        throw Error(ErrorCode::ParseError, to_string(pos) + ": unexpected character '" + std::string(1, c) + "'");
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = pos;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SystemDescription parse(Resolution res) {
    SystemDescription d;
    d.resolution = res;
    std::string section;
    std::set<std::string> seen_sections;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Ident && peek(1).kind == Tok::Colon) {
        section = next().text;
        next();
        static const std::set<std::string> known{"sorts", "statics", "fluents", "actions", "axioms"};
        if (!known.count(section)) fail("unknown section '" + section + "'");
        if (!seen_sections.insert(section).second) fail("section '" + section + "' repeated");
        continue;
      }
      if (section.empty()) fail("statement outside of any section");
      if (section == "sorts") d.sorts.push_back(sort_decl());
      else if (section == "statics") d.statics.push_back(predicate_decl(Role::Static));
      else if (section == "fluents") d.fluents.push_back(predicate_decl(Role::Fluent));
      else if (section == "actions") d.actions.push_back(predicate_decl(Role::Action));
      else axiom_statement(d.axioms);
    }
    return d;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, to_string(peek().pos) + ": " + msg);
  }

  Token expect(Tok k, std::string_view what) {
    if (peek().kind != k) fail("expected " + std::string(what));
    return next();
  }

  bool keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  SortDecl sort_decl() {
    SortDecl s;
    s.pos = peek().pos;
    s.name = expect(Tok::Ident, "sort name").text;
    if (peek().kind == Tok::Lt) {
      next();
      s.parent = expect(Tok::Ident, "parent sort").text;
    }
    if (peek().kind == Tok::Eq) {
      next();
      expect(Tok::LBrace, "'{'");
      if (peek().kind != Tok::RBrace) {
        s.constants.push_back(expect(Tok::Ident, "constant").text);
        while (peek().kind == Tok::Comma) {
          next();
          s.constants.push_back(expect(Tok::Ident, "constant").text);
        }
      }
      expect(Tok::RBrace, "'}'");
    }
    expect(Tok::Dot, "'.'");
    return s;
  }

  PredicateDecl predicate_decl(Role role) {
    PredicateDecl p;
    p.role = role;
    p.pos = peek().pos;
    p.name = expect(Tok::Ident, "predicate name").text;
    if (peek().kind == Tok::LParen) {
      next();
      p.arg_sorts.push_back(expect(Tok::Ident, "argument sort").text);
      while (peek().kind == Tok::Comma) {
        next();
        p.arg_sorts.push_back(expect(Tok::Ident, "argument sort").text);
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Dot, "'.'");
    return p;
  }

  Term term() {
    if (peek().kind == Tok::Var) return Term{true, next().text};
    if (peek().kind == Tok::Ident) return Term{false, next().text};
    fail("expected a term");
  }

  Atom atom() {
    Atom a;
    a.pos = peek().pos;
    a.predicate = expect(Tok::Ident, "predicate").text;
    if (a.predicate == "causes" || a.predicate == "if" || a.predicate == "impossible")
      fail("keyword '" + a.predicate + "' used as a predicate");
    if (peek().kind == Tok::LParen) {
      next();
      a.args.push_back(term());
      while (peek().kind == Tok::Comma) {
        next();
        a.args.push_back(term());
      }
      expect(Tok::RParen, "')'");
    }
    return a;
  }

  Literal literal() {
    Literal l;
    if (peek().kind == Tok::Minus) {
      next();
      l.negated = true;
    }
    l.atom = atom();
    return l;
  }

  void body(Axiom& ax) {
    do {
      if (peek().kind == Tok::Var ||
          (peek().kind == Tok::Ident && (peek(1).kind == Tok::Neq || peek(1).kind == Tok::Eq))) {
        Guard g;
        g.lhs = term();
        if (peek().kind == Tok::Neq) g.equal = false;
        else if (peek().kind == Tok::Eq) g.equal = true;
        else fail("expected '!=' or '='");
        next();
        g.rhs = term();
        ax.guards.push_back(std::move(g));
      } else {
        ax.body.push_back(literal());
      }
      if (peek().kind != Tok::Comma) break;
      next();
    } while (true);
  }

  void axiom_statement(std::vector<Axiom>& out) {
    Axiom ax;
    ax.pos = peek().pos;
    if (keyword("impossible")) {
      next();
      ax.kind = AxiomKind::Executability;
      ax.trigger = atom();
      if (keyword("if")) {
        next();
        body(ax);
      }
      expect(Tok::Dot, "'.'");
      out.push_back(std::move(ax));
      return;
    }
    Literal first = literal();
    if (keyword("causes")) {
      next();
      if (first.negated) fail("the action of a causal law cannot be negated");
      std::vector<Literal> heads{literal()};
      while (peek().kind == Tok::Comma) {
        next();
        heads.push_back(literal());
      }
      Axiom base;
      base.pos = ax.pos;
      base.kind = AxiomKind::CausalLaw;
      base.trigger = first.atom;
      if (keyword("if")) {
        next();
        body(base);
      }
      expect(Tok::Dot, "'.'");
      // `a causes l1, l2 if b` is shorthand for one law per effect.
      for (auto& h : heads) {
        Axiom law = base;
        law.head = std::move(h);
        out.push_back(std::move(law));
      }
      return;
    }
    ax.kind = AxiomKind::StateConstraint;
    ax.head = std::move(first);
    if (keyword("if")) {
      next();
      body(ax);
    }
    expect(Tok::Dot, "'.'");
    out.push_back(std::move(ax));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

[[noreturn]] inline void sort_error(const SourcePos& p, const std::string& msg) {
  throw Error(ErrorCode::SortError, to_string(p) + ": " + msg);
}

[[noreturn]] inline void undeclared(const SourcePos& p, const std::string& msg) {
  throw Error(ErrorCode::UndeclaredSymbol, to_string(p) + ": " + msg);
}

inline void check_signature(const SystemDescription& d) {
  std::set<std::string> names;
  for (const auto& s : d.sorts) {
    if (!names.insert(s.name).second) sort_error(s.pos, "sort '" + s.name + "' declared twice");
  }
  for (const auto& s : d.sorts) {
    if (s.parent && d.sort(*s.parent) == nullptr) undeclared(s.pos, "parent sort '" + *s.parent + "' is not declared");
  }
  // Forest: walking parents from any sort must terminate.
  for (const auto& s : d.sorts) {
    std::set<std::string> chain{s.name};
    const SortDecl* cur = &s;
    while (cur->parent) {
      if (!chain.insert(*cur->parent).second) sort_error(s.pos, "sort hierarchy has a cycle through '" + s.name + "'");
      cur = d.sort(*cur->parent);
    }
  }
  std::set<std::string> constants;
  for (const auto& s : d.sorts) {
    if (!s.constants.empty() && !d.is_leaf(s.name))
      sort_error(s.pos, "constants may only be declared on leaf sorts ('" + s.name + "' has subsorts)");
    for (const auto& c : s.constants)
      if (!constants.insert(c).second) sort_error(s.pos, "constant '" + c + "' declared twice");
  }
  std::set<std::string> preds;
  for (const auto* group : {&d.statics, &d.fluents, &d.actions}) {
    for (const auto& p : *group) {
      if (!preds.insert(p.name).second) sort_error(p.pos, "predicate '" + p.name + "' declared twice");
      if (names.count(p.name)) sort_error(p.pos, "predicate '" + p.name + "' clashes with a sort name");
      for (const auto& s : p.arg_sorts)
        if (d.sort(s) == nullptr) undeclared(p.pos, "argument sort '" + s + "' of '" + p.name + "' is not declared");
    }
  }
}

inline const PredicateDecl& resolve_atom(const SystemDescription& d, const Atom& a, Axiom& ax,
                                         std::map<std::string, std::vector<std::string>>& var_uses) {
  const PredicateDecl* p = d.predicate(a.predicate);
  if (p == nullptr) undeclared(a.pos, "'" + a.predicate + "' is not a declared static, fluent or action");
  if (p->arg_sorts.size() != a.args.size())
    sort_error(a.pos, "'" + a.predicate + "' expects " + std::to_string(p->arg_sorts.size()) + " arguments, got " +
                          std::to_string(a.args.size()));
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const Term& t = a.args[i];
    const std::string& want = p->arg_sorts[i];
    if (t.variable) {
      var_uses[t.name].push_back(want);
    } else {
      auto sort = d.constant_sort(t.name);
      if (!sort) undeclared(a.pos, "constant '" + t.name + "' is not declared in any sort");
      if (!d.is_subsort(*sort, want))
        sort_error(a.pos, "constant '" + t.name + "' of sort '" + *sort + "' used where '" + want + "' is expected");
    }
  }
  (void)ax;
  return *p;
}

inline void check_axiom(const SystemDescription& d, Axiom& ax) {
  std::map<std::string, std::vector<std::string>> uses;
  if (ax.trigger) {
    const PredicateDecl& p = resolve_atom(d, *ax.trigger, ax, uses);
    if (p.role != Role::Action) sort_error(ax.trigger->pos, "'" + p.name + "' is not an action");
  }
  if (ax.head) {
    const PredicateDecl& p = resolve_atom(d, ax.head->atom, ax, uses);
    if (p.role != Role::Fluent)
      sort_error(ax.head->atom.pos, "head '" + p.name + "' must be a fluent");
  }
  for (const auto& l : ax.body) {
    const PredicateDecl& p = resolve_atom(d, l.atom, ax, uses);
    if (p.role == Role::Action) sort_error(l.atom.pos, "action '" + p.name + "' may not appear in a body");
  }
  for (const auto& g : ax.guards) {
    for (const Term* t : {&g.lhs, &g.rhs}) {
      if (t->variable) {
        if (!uses.count(t->name)) sort_error(ax.pos, "variable '" + t->name + "' only occurs in a guard");
      } else if (!d.constant_sort(t->name)) {
        undeclared(ax.pos, "constant '" + t->name + "' is not declared in any sort");
      }
    }
  }
  for (const auto& [var, sorts] : uses) {
    std::string cur = sorts.front();
    for (const auto& s : sorts) {
      if (d.is_subsort(s, cur)) cur = s;
      else if (!d.is_subsort(cur, s))
        sort_error(ax.pos, "variable '" + var + "' used with incompatible sorts '" + cur + "' and '" + s + "'");
    }
    ax.variable_sorts[var] = cur;
  }
}

/// Rejects descriptions whose state constraints feed a fluent back into
/// itself through a negated body literal.
inline void check_stratified(const SystemDescription& d) {
  std::set<std::string> fluent_names;
  for (const auto& f : d.fluents) fluent_names.insert(f.name);
  struct Edge {
    std::string from, to;
    bool negative;
  };
  std::vector<Edge> edges;
  for (const auto& ax : d.axioms) {
    if (ax.kind != AxiomKind::StateConstraint) continue;
    for (const auto& l : ax.body)
      if (fluent_names.count(l.atom.predicate))
        edges.push_back({l.atom.predicate, ax.head->atom.predicate, l.negated});
  }
  auto reaches = [&](const std::string& from, const std::string& to) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (cur == to) return true;
      for (const auto& e : edges)
        if (e.from == cur && seen.insert(e.to).second) stack.push_back(e.to);
    }
    return false;
  };
  for (const auto& e : edges) {
    if (e.negative && reaches(e.to, e.from))
      throw Error(ErrorCode::NonStratified,
                  "state constraints are not stratified: '" + e.to + "' depends negatively on '" + e.from +
                      "' inside a cycle");
  }
}

}  // namespace detail

/// Parses and checks a description. Errors: PARSE_ERROR, SORT_ERROR,
/// UNDECLARED_SYMBOL, NON_STRATIFIED, each prefixed with line:column.
inline SystemDescription parse_description(std::string_view text, Resolution resolution = Resolution::Coarse) {
  detail::Parser parser(detail::lex(text));
  SystemDescription d = parser.parse(resolution);
  detail::check_signature(d);
  for (auto& ax : d.axioms) detail::check_axiom(d, ax);
  detail::check_stratified(d);
  return d;
}

inline std::string to_string(const Term& t) { return t.name; }

inline std::string to_string(const Atom& a) {
  std::string s = a.predicate;
  if (!a.args.empty()) {
    s += "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) s += ",";
      s += a.args[i].name;
    }
    s += ")";
  }
  return s;
}

inline std::string to_string(const Literal& l) { return (l.negated ? "-" : "") + to_string(l.atom); }

}  // namespace ramp::al
