#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stag/common.hpp"

namespace stag {

// Character offsets into a sentence's raw text, end exclusive.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
  friend auto operator<=>(const CharSpan&, const CharSpan&) = default;
};

// Token index range, end exclusive.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
  friend auto operator<=>(const TokenRange&, const TokenRange&) = default;
};

// Unit scored by the elementary dependency match metric. A triple read from a
// file without spans is unanchored and matches on predicates and role only.
struct DependencyTriple {
  std::string head_pred;
  std::string role;
  std::string dep_pred;
  std::optional<TokenRange> head_span;
  std::optional<TokenRange> dep_span;

  bool anchored() const { return head_span.has_value() && dep_span.has_value(); }
  friend bool operator==(const DependencyTriple&, const DependencyTriple&) = default;
  friend auto operator<=>(const DependencyTriple&, const DependencyTriple&) = default;
};

struct Token {
  std::string form;
  std::string pos;
  std::optional<std::string> gold_tag;
  CharSpan span;
};

struct Sentence {
  std::string id;
  std::string raw_text;
  std::vector<Token> tokens;
  std::optional<std::vector<DependencyTriple>> gold_triples;

  std::size_t size() const { return tokens.size(); }
};

struct Corpus {
  std::string name;
  std::vector<Sentence> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

enum class CorpusFormat { tsv, jsonl };

inline CorpusFormat parse_corpus_format(std::string_view s) {
  if (s == "tsv") return CorpusFormat::tsv;
  if (s == "jsonl") return CorpusFormat::jsonl;
  throw Error("unknown corpus format '" + std::string(s) + "' (expected tsv or jsonl)");
}

inline CorpusFormat corpus_format_from_path(const std::filesystem::path& p) {
  return p.extension() == ".jsonl" ? CorpusFormat::jsonl : CorpusFormat::tsv;
}

// Checks token and sentence invariants; throws ValidationError.
inline void validate_sentence(const Sentence& s) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& t = s.tokens[i];
    auto where = "sentence '" + s.id + "' token " + std::to_string(i);
    if (t.form.empty()) throw ValidationError(where + ": empty form");
    if (t.span.start >= t.span.end) throw ValidationError(where + ": empty or inverted span");
    if (i > 0 && t.span.start < prev_end)
      throw ValidationError(where + ": span overlaps or precedes the previous token");
    if (t.span.end > s.raw_text.size()) throw ValidationError(where + ": span exceeds text");
    auto slice = std::string_view(s.raw_text).substr(t.span.start, t.span.end - t.span.start);
    if (util::normalize_space(slice) != util::normalize_space(t.form))
      throw ValidationError(where + ": form '" + t.form + "' does not match text '" +
                            std::string(slice) + "'");
    prev_end = t.span.end;
  }
}

inline void validate_corpus(const Corpus& c) {
  std::unordered_set<std::string> ids;
  for (const auto& s : c.sentences) {
    if (!ids.insert(s.id).second) throw ValidationError("duplicate sentence id '" + s.id + "'");
    validate_sentence(s);
  }
}

// Rebuilds raw text and spans by joining forms with single spaces.
inline void synthesize_spans(Sentence& s) {
  s.raw_text.clear();
  for (auto& t : s.tokens) {
    if (!s.raw_text.empty()) s.raw_text.push_back(' ');
    t.span.start = s.raw_text.size();
    s.raw_text += t.form;
    t.span.end = s.raw_text.size();
  }
}

// TSV: "# id = X" comment, then FORM<TAB>POS[<TAB>TAG] lines; blank line ends a sentence.
inline Corpus read_tsv(std::istream& in, std::string name = {}) {
  Corpus corpus{std::move(name), {}};
  Sentence current;
  bool have_id = false;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (current.tokens.empty()) {
      if (have_id) throw ParseError("sentence '" + current.id + "' has no tokens", lineno);
      return;
    }
    if (!have_id) current.id = std::to_string(corpus.sentences.size());
    synthesize_spans(current);
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    have_id = false;
  };
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      auto body = util::trim(std::string_view(line).substr(1));
      if (util::starts_with(body, "id")) {
        auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("malformed id comment", lineno);
        if (!current.tokens.empty()) flush();
        current.id = std::string(util::trim(body.substr(eq + 1)));
        if (current.id.empty()) throw ParseError("empty sentence id", lineno);
        have_id = true;
      }
      continue;
    }
    auto cols = util::split(line, '\t');
    if (cols.size() < 2 || cols.size() > 3)
      throw ParseError("expected 2 or 3 tab-separated columns, got " + std::to_string(cols.size()),
                       lineno);
    Token t;
    t.form = cols[0];
    t.pos = cols[1];
    if (t.form.empty()) throw ParseError("empty form", lineno);
    if (t.pos.empty()) throw ParseError("empty POS", lineno);
    if (cols.size() == 3) {
      if (cols[2].empty()) throw ParseError("empty tag column", lineno);
      t.gold_tag = cols[2];
    }
    current.tokens.push_back(std::move(t));
  }
  flush();
  validate_corpus(corpus);
  return corpus;
}

inline void write_tsv(std::ostream& out, const Corpus& c) {
  for (const auto& s : c.sentences) {
    out << "# id = " << s.id << '\n';
    for (const auto& t : s.tokens) {
      out << t.form << '\t' << t.pos;
      if (t.gold_tag) out << '\t' << *t.gold_tag;
      out << '\n';
    }
    out << '\n';
  }
}

inline nlohmann::json triple_to_json(const DependencyTriple& t) {
  nlohmann::json j{{"head", t.head_pred}, {"role", t.role}, {"dep", t.dep_pred}};
  if (t.head_span) j["head_span"] = {t.head_span->begin, t.head_span->end};
  if (t.dep_span) j["dep_span"] = {t.dep_span->begin, t.dep_span->end};
  return j;
}

inline DependencyTriple triple_from_json(const nlohmann::json& j) {
  DependencyTriple t;
  t.head_pred = j.at("head").get<std::string>();
  t.role = j.at("role").get<std::string>();
  t.dep_pred = j.at("dep").get<std::string>();
  auto range = [](const nlohmann::json& r) {
    if (!r.is_array() || r.size() != 2) throw Error("span must be [begin, end]");
    return TokenRange{r[0].get<std::size_t>(), r[1].get<std::size_t>()};
  };
  if (j.contains("head_span")) t.head_span = range(j["head_span"]);
  if (j.contains("dep_span")) t.dep_span = range(j["dep_span"]);
  return t;
}

inline nlohmann::json sentence_to_json(const Sentence& s) {
  nlohmann::json toks = nlohmann::json::array();
  for (const auto& t : s.tokens) {
    nlohmann::json jt{{"form", t.form}, {"pos", t.pos}};
    if (t.gold_tag) jt["tag"] = *t.gold_tag;
    jt["start"] = t.span.start;
    jt["end"] = t.span.end;
    toks.push_back(std::move(jt));
  }
  nlohmann::json j{{"id", s.id}, {"text", s.raw_text}, {"tokens", std::move(toks)}};
  if (s.gold_triples) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : *s.gold_triples) tr.push_back(triple_to_json(t));
    j["triples"] = std::move(tr);
  }
  return j;
}

inline Sentence sentence_from_json(const nlohmann::json& j) {
  Sentence s;
  s.id = j.at("id").get<std::string>();
  s.raw_text = j.at("text").get<std::string>();
  for (const auto& jt : j.at("tokens")) {
    Token t;
    t.form = jt.at("form").get<std::string>();
    t.pos = jt.at("pos").get<std::string>();
    if (jt.contains("tag") && !jt["tag"].is_null()) t.gold_tag = jt["tag"].get<std::string>();
    t.span = {jt.at("start").get<std::size_t>(), jt.at("end").get<std::size_t>()};
    s.tokens.push_back(std::move(t));
  }
  if (j.contains("triples")) {
    std::vector<DependencyTriple> triples;
    for (const auto& jt : j["triples"]) triples.push_back(triple_from_json(jt));
    s.gold_triples = std::move(triples);
  }
  return s;
}

inline Corpus read_jsonl(std::istream& in, std::string name = {}) {
  Corpus corpus{std::move(name), {}};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    try {
      corpus.sentences.push_back(sentence_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  validate_corpus(corpus);
  return corpus;
}

inline void write_jsonl(std::ostream& out, const Corpus& c) {
  for (const auto& s : c.sentences) out << sentence_to_json(s).dump() << '\n';
}

inline Corpus load_token_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus '" + path.string() + "'");
  auto name = path.stem().string();
  return format == CorpusFormat::tsv ? read_tsv(in, name) : read_jsonl(in, name);
}

inline Corpus load_token_corpus(const std::filesystem::path& path) {
  return load_token_corpus(path, corpus_format_from_path(path));
}

inline void save_corpus(const std::filesystem::path& path, const Corpus& c, CorpusFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  if (format == CorpusFormat::tsv)
    write_tsv(out, c);
  else
    write_jsonl(out, c);
}

// Ordered POS sequence -> single POS. Keys have length >= 2.
struct PosComboMap {
  std::map<std::vector<std::string>, std::string> entries;
};

inline PosComboMap read_pos_combo_map(std::istream& in) {
  PosComboMap m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = util::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto cols = util::split(body, '\t');
    if (cols.size() != 2) throw ParseError("expected COMBO<TAB>POS", lineno);
    auto key = util::split(cols[0], '+');
    if (key.size() < 2) throw ParseError("combination needs at least two tags", lineno);
    for (const auto& k : key)
      if (k.empty()) throw ParseError("empty tag in combination", lineno);
    auto value = std::string(util::trim(cols[1]));
    if (value.empty() || value.find('+') != std::string::npos)
      throw ParseError("mapped value must be a single tag", lineno);
    m.entries[key] = value;
  }
  return m;
}

inline PosComboMap load_pos_combo_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open POS map '" + path.string() + "'");
  return read_pos_combo_map(in);
}

// Unknown combinations fall back to their first tag.
inline std::string map_pos_combo(const std::vector<std::string>& combo, const PosComboMap& map) {
  if (combo.empty()) throw std::invalid_argument("map_pos_combo: empty combination");
  if (combo.size() == 1) return combo.front();
  if (auto it = map.entries.find(combo); it != map.entries.end()) return it->second;
  return combo.front();
}

// Rewrites "A+B" POS fields in place; returns the number of tokens changed.
inline std::size_t normalize_pos(Corpus& c, const PosComboMap& map) {
  std::size_t changed = 0;
  for (auto& s : c.sentences)
    for (auto& t : s.tokens)
      if (t.pos.find('+') != std::string::npos) {
        t.pos = map_pos_combo(util::split(t.pos, '+'), map);
        ++changed;
      }
  return changed;
}

inline std::vector<std::string> tag_inventory(const Corpus& c) {
  std::set<std::string> tags;
  for (const auto& s : c.sentences)
    for (const auto& t : s.tokens) {
      if (!t.gold_tag) throw Error("corpus '" + c.name + "' sentence '" + s.id + "' lacks gold tags");
      tags.insert(*t.gold_tag);
    }
  return {tags.begin(), tags.end()};
}

struct SplitRule {
  std::string name;
  std::string pattern;
};

// "train:0-7,dev:8,test:9". A pattern is an integer or integer range matched
// against numeric ids, otherwise a glob; "|" separates alternatives.
inline std::vector<SplitRule> parse_split_spec(std::string_view spec) {
  std::vector<SplitRule> rules;
  for (const auto& part : util::split(spec, ',')) {
    auto p = util::trim(part);
    if (p.empty()) continue;
    auto colon = p.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == p.size())
      throw Error("malformed split entry '" + std::string(p) + "' (expected name:pattern)");
    rules.push_back({std::string(p.substr(0, colon)), std::string(p.substr(colon + 1))});
  }
  return rules;
}

namespace detail {

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool id_matches(std::string_view pattern, const std::string& id) {
  for (const auto& alt : util::split(pattern, '|')) {
    auto dash = alt.find('-', 1);
    auto lo = parse_int(dash == std::string::npos ? std::string_view(alt)
                                                  : std::string_view(alt).substr(0, dash));
    auto hi = dash == std::string::npos ? lo : parse_int(std::string_view(alt).substr(dash + 1));
    if (lo && hi) {
      if (auto v = parse_int(id); v && *v >= *lo && *v <= *hi) return true;
    } else if (util::glob_match(alt, id)) {
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline std::vector<Corpus> split_corpus(const Corpus& c, const std::vector<SplitRule>& rules) {
  std::vector<Corpus> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rules)
    if (index.emplace(r.name, out.size()).second) out.push_back({r.name, {}});
  std::vector<std::string> unmatched, overlapping;
  for (const auto& s : c.sentences) {
    std::optional<std::size_t> target;
    bool clash = false;
    for (const auto& r : rules) {
      if (!detail::id_matches(r.pattern, s.id)) continue;
      auto k = index.at(r.name);
      if (target && *target != k) clash = true;
      target = k;
    }
    if (clash)
      overlapping.push_back(s.id);
    else if (!target)
      unmatched.push_back(s.id);
    else
      out[*target].sentences.push_back(s);
  }
  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 20) s += ", ...";
    return s;
  };
  if (!overlapping.empty())
    throw Error("split patterns overlap on sentence ids: " + list(overlapping));
  if (!unmatched.empty()) throw Error("split patterns leave sentence ids unmatched: " + list(unmatched));
  return out;
}

inline Corpus concatenate(const std::vector<Corpus>& parts, std::string name = "all") {
  Corpus out{std::move(name), {}};
  for (const auto& p : parts) out.sentences.insert(out.sentences.end(), p.sentences.begin(), p.sentences.end());
  return out;
}

}  // namespace stag
