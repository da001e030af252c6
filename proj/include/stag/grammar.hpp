#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "stag/unify.hpp"

namespace stag {

struct LexicalEntry {
  std::string id;
  std::string orth;
  std::string lextype;
  std::string predicate;
  TypeId type = kTop;
  FeatureStructure fs;
};

// Root type and depth-one arc types a daughter must be compatible with.
struct QuickCheck {
  TypeId root = kTop;
  std::vector<std::pair<AttrId, TypeId>> arcs;
};

struct Rule {
  std::string name;
  int arity = 2;
  int head_index = 0;
  std::vector<std::string> roles;  // one per non-head daughter, in daughter order
  FeatureStructure fs;             // MOTHER, DTR0, DTR1 at the top level
  std::uint32_t mother = 0;
  std::array<std::uint32_t, 2> daughters{};
  std::array<QuickCheck, 2> quick{};
};

// Grammar text format, one section header per line:
//   TYPES        child < parent [parent...]
//   CONSTRAINTS  type: PATH = value...
//   RULES        name := arity head=i roles=[R,...]  then indented PATH = value... lines
//   START        type
//   LEXICON      orth<TAB>lextype<TAB>predicate[<TAB>id]
// A value is a type, a path, or a #tag; paths are dotted upper-case attributes.
class Grammar {
 public:
  TypeHierarchy types;
  std::vector<Rule> rules;
  std::vector<LexicalEntry> lexicon;
  TypeId start = kTop;
  FeatureStructure start_fs;
  AttrId mother_attr = 0;
  std::array<AttrId, 2> dtr_attr{};

  static Grammar parse(std::istream& in);
  static Grammar load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GrammarError("cannot open grammar '" + path.string() + "'");
    return parse(in);
  }

  // Exact orthography first, then case-folded.
  std::vector<const LexicalEntry*> lexical_lookup(std::string_view form) const {
    std::vector<const LexicalEntry*> out;
    const std::vector<std::size_t>* hits = nullptr;
    if (auto it = by_orth_.find(std::string(form)); it != by_orth_.end())
      hits = &it->second;
    else if (auto f = by_folded_.find(util::to_lower(form)); f != by_folded_.end())
      hits = &f->second;
    if (hits)
      for (auto i : *hits) out.push_back(&lexicon[i]);
    return out;
  }

  std::set<std::string> lexical_types() const {
    std::set<std::string> out;
    for (const auto& e : lexicon) out.insert(e.lextype);
    return out;
  }

  bool is_root(const FeatureStructure& fs) const { return subsumes(types, start_fs, fs); }

  const Rule* find_rule(std::string_view name) const {
    for (const auto& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }

 private:
  void index_lexicon() {
    by_orth_.clear();
    by_folded_.clear();
    std::vector<std::size_t> order(lexicon.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return lexicon[a].lextype < lexicon[b].lextype; });
    for (auto i : order) {
      by_orth_[lexicon[i].orth].push_back(i);
      by_folded_[util::to_lower(lexicon[i].orth)].push_back(i);
    }
  }

  std::map<std::string, std::vector<std::size_t>> by_orth_;
  std::map<std::string, std::vector<std::size_t>> by_folded_;
};

namespace detail {

inline bool is_attribute_name(std::string_view s) {
  if (s.empty() || s[0] < 'A' || s[0] > 'Z') return false;
  for (char c : s)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

inline bool is_path_text(std::string_view s) {
  for (const auto& part : util::split(s, '.'))
    if (!is_attribute_name(part)) return false;
  return true;
}

struct Equation {
  std::string lhs;
  std::vector<std::string> rhs;
  std::size_t line = 0;
};

inline Equation parse_equation(std::string_view text, std::size_t line) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ParseError("expected 'PATH = value'", line);
  Equation e;
  e.lhs = util::trim(text.substr(0, eq));
  e.rhs = util::fields(text.substr(eq + 1));
  e.line = line;
  if (!is_path_text(e.lhs)) throw ParseError("'" + e.lhs + "' is not a path", line);
  if (e.rhs.empty()) throw ParseError("missing value after '='", line);
  return e;
}

inline void apply_equation(FsBuilder& b, TypeHierarchy& h, const Equation& e) {
  auto lhs = parse_path(h, e.lhs);
  try {
    for (const auto& v : e.rhs) {
      if (v[0] == '#') {
        if (v.size() < 2) throw ParseError("empty tag", e.line);
        b.tag(lhs, v);
      } else if (is_path_text(v)) {
        b.share(lhs, parse_path(h, v));
      } else {
        auto t = h.find(v);
        if (!t) throw ParseError("unknown type '" + v + "'", e.line);
        b.type(lhs, *t);
      }
    }
  } catch (const ParseError&) {
    throw;
  } catch (const GrammarError& err) {
    throw ParseError(err.what(), e.line);
  }
}

struct RuleText {
  Rule rule;
  std::vector<Equation> body;
  std::size_t line = 0;
};

inline RuleText parse_rule_header(const std::string& text, std::size_t line) {
  static const std::regex re(R"(^\s*(\S+)\s*:=\s*(\d+)\s+head=(\d+)\s+roles=\[([^\]]*)\]\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ParseError("expected 'name := arity head=i roles=[...]'", line);
  RuleText r;
  r.line = line;
  r.rule.name = m[1];
  r.rule.arity = std::stoi(m[2]);
  r.rule.head_index = std::stoi(m[3]);
  for (const auto& role : util::split(m[4].str(), ','))
    if (!util::trim(role).empty()) r.rule.roles.emplace_back(util::trim(role));
  if (r.rule.arity < 1 || r.rule.arity > 2) throw ParseError("rule arity must be 1 or 2", line);
  if (r.rule.head_index >= r.rule.arity) throw ParseError("head index out of range", line);
  if (static_cast<int>(r.rule.roles.size()) != r.rule.arity - 1)
    throw ParseError("rule needs one role per non-head daughter", line);
  return r;
}

inline QuickCheck make_quick_check(const FeatureStructure& fs, std::uint32_t node) {
  QuickCheck q;
  q.root = fs.type(node);
  for (const auto& a : fs.arcs(node))
    if (fs.type(a.target) != kTop) q.arcs.emplace_back(a.attr, fs.type(a.target));
  return q;
}

}  // namespace detail

inline Grammar Grammar::parse(std::istream& in) {
  enum class Section { none, types, constraints, rules, start, lexicon } section = Section::none;
  std::vector<TypeHierarchy::Declaration> decls;
  std::vector<std::pair<std::string, detail::Equation>> constraint_text;
  std::vector<detail::RuleText> rule_text;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> lexicon_text;
  std::string start_name;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    auto line = util::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line == "TYPES") { section = Section::types; continue; }
    if (line == "CONSTRAINTS") { section = Section::constraints; continue; }
    if (line == "RULES") { section = Section::rules; continue; }
    if (line == "START") { section = Section::start; continue; }
    if (line == "LEXICON") { section = Section::lexicon; continue; }
    switch (section) {
      case Section::none:
        throw ParseError("content before the first section header", lineno);
      case Section::types: {
        TypeHierarchy::Declaration d;
        auto lt = line.find('<');
        d.name = util::trim(line.substr(0, lt));
        if (d.name.empty() || d.name.find(' ') != std::string::npos)
          throw ParseError("bad type declaration", lineno);
        if (lt != std::string::npos) d.parents = util::fields(line.substr(lt + 1));
        decls.push_back(std::move(d));
        break;
      }
      case Section::constraints: {
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'type: PATH = value'", lineno);
        constraint_text.emplace_back(util::trim(line.substr(0, colon)),
                                     detail::parse_equation(line.substr(colon + 1), lineno));
        break;
      }
      case Section::rules: {
        bool indented = raw[0] == ' ' || raw[0] == '\t';
        if (!indented) {
          rule_text.push_back(detail::parse_rule_header(std::string(line), lineno));
        } else {
          if (rule_text.empty()) throw ParseError("rule body without a header", lineno);
          rule_text.back().body.push_back(detail::parse_equation(line, lineno));
        }
        break;
      }
      case Section::start:
        if (!start_name.empty()) throw ParseError("more than one start symbol", lineno);
        start_name = line;
        break;
      case Section::lexicon: {
        auto cols = util::split(line, '\t');
        for (auto& c : cols) c = util::trim(c);
        if (cols.size() < 3 || cols.size() > 4)
          throw ParseError("lexicon lines are orth<TAB>lextype<TAB>predicate[<TAB>id]", lineno);
        lexicon_text.emplace_back(std::move(cols), lineno);
        break;
      }
    }
  }

  Grammar g;
  g.types = TypeHierarchy::build(decls);
  auto& h = g.types;
  g.mother_attr = h.intern_attribute("MOTHER");
  g.dtr_attr = {h.intern_attribute("DTR0"), h.intern_attribute("DTR1")};

  // Constraint expansion, parents first, memoized; recursion is an error.
  std::map<TypeId, std::vector<const detail::Equation*>> own;
  for (const auto& [tname, eq] : constraint_text) {
    auto t = h.find(tname);
    if (!t) throw ParseError("constraint on unknown type '" + tname + "'", eq.line);
    own[*t].push_back(&eq);
  }
  std::vector<int> state(h.size(), 0);
  std::function<void(TypeId)> ensure = [&](TypeId t) {
    auto i = static_cast<std::size_t>(t);
    if (state[i] == 2) return;
    if (state[i] == 1) throw GrammarError("type constraint of '" + h.name(t) + "' is recursive");
    state[i] = 1;
    auto lookup = [&, t](TypeId x) -> const FeatureStructure* {
      if (x == t) return nullptr;
      ensure(x);
      return h.constraint(x);
    };
    FsBuilder b(h, t);
    if (auto it = own.find(t); it != own.end())
      for (const auto* eq : it->second) detail::apply_equation(b, h, *eq);
    auto mine = b.build(true, lookup);
    if (!mine) throw GrammarError("constraints on type '" + h.name(t) + "' are inconsistent");
    Unifier u(h, lookup);
    auto root = u.add(*mine);
    for (auto p : h.parents(t)) {
      ensure(p);
      if (const auto* pc = h.constraint(p))
        if (!u.unify(root, u.add(*pc)))
          throw GrammarError("type '" + h.name(t) + "' is incompatible with the constraint of '" + h.name(p) + "'");
    }
    auto result = u.materialize(root);
    if (!result) throw GrammarError("constraint of type '" + h.name(t) + "' is cyclic");
    h.set_constraint(t, std::move(*result));
    state[i] = 2;
  };
  for (auto t : h.topological_order()) ensure(t);

  for (auto& rt : rule_text) {
    FsBuilder b(h);
    b.type({g.mother_attr}, kTop);
    for (int d = 0; d < rt.rule.arity; ++d) b.type({g.dtr_attr[static_cast<std::size_t>(d)]}, kTop);
    for (const auto& eq : rt.body) {
      auto first = util::split(eq.lhs, '.')[0];
      bool ok = first == "MOTHER" || (first == "DTR0") || (first == "DTR1" && rt.rule.arity == 2);
      if (!ok) throw ParseError("rule paths start with MOTHER or DTR0..DTR" + std::to_string(rt.rule.arity - 1), eq.line);
      detail::apply_equation(b, h, eq);
    }
    auto fs = b.build();
    if (!fs) throw GrammarError("rule '" + rt.rule.name + "' is inconsistent");
    rt.rule.fs = std::move(*fs);
    rt.rule.mother = *rt.rule.fs.follow(0, g.mother_attr);
    for (int d = 0; d < rt.rule.arity; ++d) {
      auto n = *rt.rule.fs.follow(0, g.dtr_attr[static_cast<std::size_t>(d)]);
      rt.rule.daughters[static_cast<std::size_t>(d)] = n;
      rt.rule.quick[static_cast<std::size_t>(d)] = detail::make_quick_check(rt.rule.fs, n);
    }
    if (g.find_rule(rt.rule.name)) throw ParseError("rule '" + rt.rule.name + "' defined twice", rt.line);
    g.rules.push_back(std::move(rt.rule));
  }

  if (start_name.empty()) throw GrammarError("grammar has no START section");
  g.start = h.id(start_name);
  g.start_fs = h.constraint(g.start) ? *h.constraint(g.start) : FeatureStructure::atom(g.start);

  std::set<std::string> ids;
  for (auto& [cols, line] : lexicon_text) {
    LexicalEntry e;
    e.orth = cols[0];
    e.lextype = cols[1];
    e.predicate = cols[2];
    e.id = cols.size() == 4 ? cols[3] : e.orth + "@" + e.lextype;
    auto t = h.find(e.lextype);
    if (!t) throw ParseError("unknown lexical type '" + e.lextype + "'", line);
    if (!h.is_leaf(*t)) throw ParseError("lexical type '" + e.lextype + "' is not a leaf type", line);
    if (!ids.insert(e.id).second) throw ParseError("duplicate lexical entry '" + e.id + "'", line);
    e.type = *t;
    e.fs = h.constraint(*t) ? *h.constraint(*t) : FeatureStructure::atom(*t);
    g.lexicon.push_back(std::move(e));
  }
  g.index_lexicon();
  return g;
}

}  // namespace stag
