#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "stag/corpus.hpp"
#include "stag/grammar.hpp"
#include "stag/predictions.hpp"

namespace stag {

enum class PruneMode { none, supertag };

inline std::string to_string(PruneMode m) { return m == PruneMode::none ? "none" : "supertag"; }

struct PruneConfig {
  PruneMode mode = PruneMode::none;
  std::shared_ptr<const TagSource> predictions;
  std::set<std::string> exceptions;

  static PruneConfig none() { return {}; }
  static PruneConfig supertag(std::shared_ptr<const TagSource> p, std::set<std::string> exceptions = {}) {
    return {PruneMode::supertag, std::move(p), std::move(exceptions)};
  }
};

struct Budget {
  std::size_t max_edges = 20000;
};

enum class ParseStatus { parsed, no_parse, budget_exceeded };

inline std::string to_string(ParseStatus s) {
  switch (s) {
    case ParseStatus::parsed: return "parsed";
    case ParseStatus::no_parse: return "no_parse";
    case ParseStatus::budget_exceeded: return "budget_exceeded";
  }
  return "?";
}

inline ParseStatus parse_status(std::string_view s) {
  if (s == "parsed") return ParseStatus::parsed;
  if (s == "no_parse") return ParseStatus::no_parse;
  if (s == "budget_exceeded") return ParseStatus::budget_exceeded;
  throw Error("unknown parse status '" + std::string(s) + "'");
}

struct ParseStats {
  std::size_t lexical_edges_kept = 0;
  std::size_t lexical_edges_pruned = 0;
  std::size_t total_edges = 0;
  std::size_t prune_misses = 0;
  std::size_t exempt_tokens = 0;
  std::size_t lexical_gaps = 0;
  double wall_time = 0;  // seconds
};

struct ChartEdge {
  std::uint32_t id = 0;
  TokenRange span;
  FeatureStructure fs;
  const Rule* rule = nullptr;            // null for lexical edges
  const LexicalEntry* entry = nullptr;   // set for lexical edges
  std::vector<std::uint32_t> daughters;

  bool lexical() const { return rule == nullptr; }
  const std::string& source() const { return lexical() ? entry->id : rule->name; }
};

struct ParseResult {
  ParseStatus status = ParseStatus::no_parse;
  std::vector<ChartEdge> edges;
  std::vector<std::uint32_t> roots;  // full-span edges satisfying the start symbol
  ParseStats stats;
};

// Lexical edges for s; tokens with no entry at all are counted as gaps.
inline std::vector<std::vector<const LexicalEntry*>> build_lexical_chart(const Grammar& g, const Sentence& s,
                                                                        const PruneConfig& p, ParseStats& stats) {
  std::vector<std::string> predicted;
  if (p.mode == PruneMode::supertag) {
    if (!p.predictions) throw Error("supertag pruning needs predictions");
    predicted = p.predictions->tags_for(s);
    if (predicted.size() != s.tokens.size())
      throw AlignmentError(s.id, "prediction count does not match token count");
  }
  std::vector<std::vector<const LexicalEntry*>> out(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    auto candidates = g.lexical_lookup(s.tokens[i].form);
    if (candidates.empty()) {
      ++stats.lexical_gaps;
      continue;
    }
    auto& kept = out[i];
    if (p.mode == PruneMode::none) {
      kept = candidates;
    } else if (std::any_of(candidates.begin(), candidates.end(),
                           [&](const LexicalEntry* e) { return p.exceptions.count(e->lextype) > 0; })) {
      ++stats.exempt_tokens;
      kept = candidates;
    } else {
      for (const auto* e : candidates)
        if (e->lextype == predicted[i]) kept.push_back(e);
      if (kept.empty()) {
        ++stats.prune_misses;
        kept = candidates;
      }
    }
    stats.lexical_edges_kept += kept.size();
    stats.lexical_edges_pruned += candidates.size() - kept.size();
  }
  return out;
}

namespace detail {

inline bool quick_compatible(const TypeHierarchy& h, const QuickCheck& q, const FeatureStructure& fs) {
  if (h.glb(q.root, fs.type()) == kBottom) return false;
  for (const auto& [attr, t] : q.arcs) {
    auto n = fs.follow(0, attr);
    if (n && h.glb(t, fs.type(*n)) == kBottom) return false;
  }
  return true;
}

class ChartParser {
 public:
  ChartParser(const Grammar& g, const Budget& b, ParseResult& r) : g_(g), budget_(b), r_(r), u_(g.types) {}

  void run(const Sentence& s, const std::vector<std::vector<const LexicalEntry*>>& lexical) {
    const auto n = s.tokens.size();
    by_start_.assign(n + 1, {});
    by_end_.assign(n + 1, {});
    for (std::size_t i = 0; i < n; ++i)
      for (const auto* e : lexical[i]) {
        ChartEdge edge;
        edge.span = {i, i + 1};
        edge.fs = e->fs;
        edge.entry = e;
        if (!push(std::move(edge))) return;
      }
    while (!agenda_.empty()) {
      auto id = agenda_.top().id;
      agenda_.pop();
      if (!process(id)) return;
    }
    for (const auto& e : r_.edges)
      if (e.span.begin == 0 && e.span.end == n && g_.is_root(e.fs)) r_.roots.push_back(e.id);
    r_.status = r_.roots.empty() ? ParseStatus::no_parse : ParseStatus::parsed;
  }

 private:
  struct Item {
    std::size_t length, left;
    std::uint32_t id;
    bool operator>(const Item& o) const {
      return std::tie(length, left, id) > std::tie(o.length, o.left, o.id);
    }
  };

  bool push(ChartEdge edge) {
    if (r_.edges.size() >= budget_.max_edges) {
      r_.status = ParseStatus::budget_exceeded;
      r_.roots.clear();
      r_.stats.total_edges = r_.edges.size() + 1;
      return false;
    }
    edge.id = static_cast<std::uint32_t>(r_.edges.size());
    agenda_.push({edge.span.end - edge.span.begin, edge.span.begin, edge.id});
    r_.edges.push_back(std::move(edge));
    r_.stats.total_edges = r_.edges.size();
    return true;
  }

  bool process(std::uint32_t id) {
    const auto span = r_.edges[id].span;
    by_start_[span.begin].push_back(id);
    by_end_[span.end].push_back(id);
    for (const auto& rule : g_.rules) {
      if (rule.arity == 1) {
        if (!apply(rule, {id})) return false;
        continue;
      }
      // id as right daughter, then as left daughter.
      for (auto l : by_end_[span.begin])
        if (!apply(rule, {l, id})) return false;
      for (auto rt : by_start_[span.end])
        if (!apply(rule, {id, rt})) return false;
    }
    return true;
  }

  bool apply(const Rule& rule, std::vector<std::uint32_t> dtrs) {
    for (std::size_t d = 0; d < dtrs.size(); ++d)
      if (!quick_compatible(g_.types, rule.quick[d], r_.edges[dtrs[d]].fs)) return true;
    u_.reset();
    auto base = u_.add(rule.fs);
    for (std::size_t d = 0; d < dtrs.size(); ++d) {
      auto node = u_.add(r_.edges[dtrs[d]].fs);
      if (!u_.unify(base + rule.daughters[d], node)) return true;
    }
    auto mother = u_.materialize(base + rule.mother);
    if (!mother) return true;
    ChartEdge edge;
    edge.span = {r_.edges[dtrs.front()].span.begin, r_.edges[dtrs.back()].span.end};
    edge.fs = std::move(*mother);
    edge.rule = &rule;
    edge.daughters = std::move(dtrs);
    return push(std::move(edge));
  }

  const Grammar& g_;
  Budget budget_;
  ParseResult& r_;
  Unifier u_;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> agenda_;
  std::vector<std::vector<std::uint32_t>> by_start_, by_end_;
};

}  // namespace detail

// Exhaustive bottom-up parse. Edges are processed in order of (span length,
// left position, creation order); the budget caps total chart edges.
inline ParseResult parse(const Grammar& g, const Sentence& s, const PruneConfig& p, const Budget& b = {}) {
  if (b.max_edges < s.tokens.size())
    throw Error("edge budget " + std::to_string(b.max_edges) + " is below the sentence length " +
                std::to_string(s.tokens.size()));
  auto t0 = std::chrono::steady_clock::now();
  ParseResult r;
  auto lexical = build_lexical_chart(g, s, p, r.stats);
  if (r.stats.lexical_gaps == 0 && !s.tokens.empty()) {
    detail::ChartParser cp(g, b, r);
    cp.run(s, lexical);
  }
  r.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Value-type view of one derivation.
struct DerivationTree {
  std::string label;  // rule name or lexical entry id
  std::string lextype;
  std::string predicate;
  int head_index = -1;
  std::vector<std::string> roles;
  TokenRange span;
  std::vector<DerivationTree> children;

  bool lexical() const { return children.empty(); }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
  }

  std::string signature() const {
    if (lexical()) return label;
    std::string out = "(" + label;
    for (const auto& c : children) out += " " + c.signature();
    return out + ")";
  }

  const DerivationTree& lexical_head() const {
    const auto* t = this;
    while (!t->lexical()) t = &t->children[static_cast<std::size_t>(t->head_index)];
    return *t;
  }

  std::vector<std::string> lextypes() const {
    if (lexical()) return {lextype};
    std::vector<std::string> out;
    for (const auto& c : children) {
      auto sub = c.lextypes();
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
};

inline DerivationTree derivation(const ParseResult& r, std::uint32_t edge_id) {
  const auto& e = r.edges.at(edge_id);
  DerivationTree t;
  t.label = e.source();
  t.span = e.span;
  if (e.lexical()) {
    t.lextype = e.entry->lextype;
    t.predicate = e.entry->predicate;
  } else {
    t.head_index = e.rule->head_index;
    t.roles = e.rule->roles;
    for (auto d : e.daughters) t.children.push_back(derivation(r, d));
  }
  return t;
}

inline std::vector<DerivationTree> derivations(const ParseResult& r) {
  std::vector<DerivationTree> out;
  for (auto id : r.roots) out.push_back(derivation(r, id));
  return out;
}

// Fewest nodes, then smallest signature.
inline std::optional<DerivationTree> select_best(const ParseResult& r) {
  std::optional<DerivationTree> best;
  std::size_t best_nodes = 0;
  std::string best_sig;
  for (auto id : r.roots) {
    auto t = derivation(r, id);
    auto nodes = t.node_count();
    auto sig = t.signature();
    if (!best || nodes < best_nodes || (nodes == best_nodes && sig < best_sig)) {
      best = std::move(t);
      best_nodes = nodes;
      best_sig = std::move(sig);
    }
  }
  return best;
}

// One triple per non-head daughter of each rule application.
inline std::vector<DependencyTriple> extract_triples(const DerivationTree& t) {
  std::vector<DependencyTriple> out;
  auto walk = [&](auto&& self, const DerivationTree& node) -> void {
    if (node.lexical()) return;
    const auto& head = node.children[static_cast<std::size_t>(node.head_index)].lexical_head();
    std::size_t role = 0;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (static_cast<int>(i) == node.head_index) continue;
      const auto& dep = node.children[i].lexical_head();
      out.push_back({head.predicate, node.roles.at(role++), dep.predicate, head.span, dep.span});
    }
    for (const auto& c : node.children) self(self, c);
  };
  walk(walk, t);
  std::sort(out.begin(), out.end());
  return out;
}

struct ExceptionCount {
  std::string lextype;
  std::size_t mistakes = 0;
};

// Gold lexical types ranked by how often the predictions got them wrong.
inline std::vector<ExceptionCount> rank_mistakes(const Corpus& dev,
                                                 const std::vector<std::vector<std::string>>& predicted) {
  if (predicted.size() != dev.sentences.size()) throw Error("prediction count does not match the dev corpus");
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < dev.sentences.size(); ++i) {
    const auto& s = dev.sentences[i];
    if (predicted[i].size() != s.tokens.size()) throw AlignmentError(s.id, "prediction count does not match tokens");
    for (std::size_t j = 0; j < s.tokens.size(); ++j) {
      if (!s.tokens[j].gold_tag) throw Error("dev sentence '" + s.id + "' lacks gold tags");
      if (predicted[i][j] != *s.tokens[j].gold_tag) ++counts[*s.tokens[j].gold_tag];
    }
  }
  std::vector<ExceptionCount> out;
  for (const auto& [t, c] : counts) out.push_back({t, c});
  std::stable_sort(out.begin(), out.end(),
                   [](const ExceptionCount& a, const ExceptionCount& b) { return a.mistakes > b.mistakes; });
  return out;
}

inline std::vector<std::string> compile_exceptions(const Corpus& dev,
                                                   const std::vector<std::vector<std::string>>& predicted,
                                                   std::size_t k = 15) {
  auto ranked = rank_mistakes(dev, predicted);
  auto tagset = tag_inventory(dev).size();
  if (k > tagset) {
    warn("exception list size " + std::to_string(k) + " exceeds the tagset size " + std::to_string(tagset) +
         "; clamping");
    k = tagset;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].lextype);
  return out;
}

inline std::set<std::string> read_exceptions(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = util::trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.emplace(t);
  }
  return out;
}

inline std::set<std::string> load_exceptions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open exception list '" + path.string() + "'");
  return read_exceptions(in);
}

inline void write_exceptions(std::ostream& out, const std::vector<std::string>& list) {
  for (const auto& t : list) out << t << '\n';
}

struct SentenceParse {
  std::string id;
  ParseStatus status = ParseStatus::no_parse;
  std::vector<DependencyTriple> triples;  // from the best derivation
  std::vector<std::string> lextypes;      // leaves of the best derivation
  ParseStats stats;
};

inline SentenceParse parse_sentence(const Grammar& g, const Sentence& s, const PruneConfig& p, const Budget& b = {}) {
  auto r = parse(g, s, p, b);
  SentenceParse out{s.id, r.status, {}, {}, r.stats};
  if (auto best = select_best(r)) {
    out.triples = extract_triples(*best);
    out.lextypes = best->lextypes();
  }
  return out;
}

inline std::vector<SentenceParse> parse_corpus(const Grammar& g, const Corpus& c, const PruneConfig& p,
                                               const Budget& b = {}) {
  std::vector<SentenceParse> out;
  out.reserve(c.sentences.size());
  for (const auto& s : c.sentences) out.push_back(parse_sentence(g, s, p, b));
  return out;
}

inline nlohmann::json to_json(const SentenceParse& sp) {
  nlohmann::json triples = nlohmann::json::array();
  for (const auto& t : sp.triples) triples.push_back(triple_to_json(t));
  return {{"id", sp.id},
          {"status", to_string(sp.status)},
          {"triples", triples},
          {"stats",
           {{"lexical_edges_kept", sp.stats.lexical_edges_kept},
            {"lexical_edges_pruned", sp.stats.lexical_edges_pruned},
            {"total_edges", sp.stats.total_edges},
            {"prune_misses", sp.stats.prune_misses},
            {"exempt_tokens", sp.stats.exempt_tokens},
            {"lexical_gaps", sp.stats.lexical_gaps},
            {"wall_time", sp.stats.wall_time}}}};
}

inline SentenceParse sentence_parse_from_json(const nlohmann::json& j) {
  SentenceParse sp;
  sp.id = j.at("id").get<std::string>();
  sp.status = parse_status(j.at("status").get<std::string>());
  for (const auto& t : j.at("triples")) sp.triples.push_back(triple_from_json(t));
  if (j.contains("stats")) {
    const auto& st = j.at("stats");
    sp.stats.lexical_edges_kept = st.value("lexical_edges_kept", std::size_t{0});
    sp.stats.lexical_edges_pruned = st.value("lexical_edges_pruned", std::size_t{0});
    sp.stats.total_edges = st.value("total_edges", std::size_t{0});
    sp.stats.prune_misses = st.value("prune_misses", std::size_t{0});
    sp.stats.exempt_tokens = st.value("exempt_tokens", std::size_t{0});
    sp.stats.lexical_gaps = st.value("lexical_gaps", std::size_t{0});
    sp.stats.wall_time = st.value("wall_time", 0.0);
  }
  return sp;
}

inline std::vector<SentenceParse> read_parses(std::istream& in) {
  std::vector<SentenceParse> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(sentence_parse_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

}  // namespace stag
