#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stag/corpus.hpp"
#include "stag/parser.hpp"

namespace stag {

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

inline std::string fixed2(double x) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << x;
  return out.str();
}

struct RankedCount {
  std::string key;
  std::size_t count = 0;
};

struct CorpusAccuracy {
  std::string name;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0;  // percentage, 2 decimals
};

struct TagEvalReport {
  std::vector<CorpusAccuracy> corpora;
  double overall = 0;  // pooled over all tokens
  double macro = 0;    // unweighted mean of per-corpus accuracies
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;  // (gold, predicted)
  std::vector<RankedCount> top_mistaken_tokens;
  std::vector<RankedCount> top_under_predicted;  // gold tags missed
  std::vector<RankedCount> top_over_predicted;   // tags predicted wrongly
};

namespace detail {

inline std::vector<RankedCount> ranked(const std::map<std::string, std::size_t>& counts, std::size_t limit) {
  std::vector<RankedCount> out;
  for (const auto& [k, c] : counts) out.push_back({k, c});
  std::stable_sort(out.begin(), out.end(), [](const RankedCount& a, const RankedCount& b) { return a.count > b.count; });
  if (out.size() > limit) out.resize(limit);
  return out;
}

inline double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : round2(100.0 * static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace detail

// predicted[c][s] holds the tags for sentence s of corpus c.
inline TagEvalReport eval_tagging(const std::vector<const Corpus*>& gold,
                                  const std::vector<std::vector<std::vector<std::string>>>& predicted,
                                  std::size_t top_n = 10) {
  if (gold.size() != predicted.size()) throw Error("number of predicted corpora does not match gold");
  TagEvalReport r;
  std::map<std::string, std::size_t> tokens, under, over;
  std::size_t correct = 0, total = 0;
  double macro_sum = 0;
  for (std::size_t c = 0; c < gold.size(); ++c) {
    const auto& corpus = *gold[c];
    if (predicted[c].size() != corpus.sentences.size())
      throw Error("corpus '" + corpus.name + "' has " + std::to_string(corpus.sentences.size()) +
                  " sentences but " + std::to_string(predicted[c].size()) + " predicted");
    CorpusAccuracy acc{corpus.name};
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      const auto& s = corpus.sentences[i];
      const auto& p = predicted[c][i];
      if (p.size() != s.tokens.size())
        throw AlignmentError(s.id, std::to_string(p.size()) + " predictions for " + std::to_string(s.tokens.size()) +
                                       " tokens");
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (!s.tokens[j].gold_tag) throw Error("sentence '" + s.id + "' lacks gold tags");
        const auto& g = *s.tokens[j].gold_tag;
        ++acc.total;
        ++r.confusion[{g, p[j]}];
        if (g == p[j]) {
          ++acc.correct;
        } else {
          ++tokens[s.tokens[j].form];
          ++under[g];
          ++over[p[j]];
        }
      }
    }
    acc.accuracy = detail::percent(acc.correct, acc.total);
    correct += acc.correct;
    total += acc.total;
    macro_sum += static_cast<double>(acc.correct) / std::max<std::size_t>(acc.total, 1);
    r.corpora.push_back(acc);
  }
  r.overall = detail::percent(correct, total);
  r.macro = gold.empty() ? 0.0 : round2(100.0 * macro_sum / static_cast<double>(gold.size()));
  r.top_mistaken_tokens = detail::ranked(tokens, top_n);
  r.top_under_predicted = detail::ranked(under, top_n);
  r.top_over_predicted = detail::ranked(over, top_n);
  return r;
}

inline TagEvalReport eval_tagging(const Corpus& gold, const std::vector<std::vector<std::string>>& predicted,
                                  std::size_t top_n = 10) {
  return eval_tagging(std::vector<const Corpus*>{&gold}, {predicted}, top_n);
}

inline void print_report(std::ostream& out, const TagEvalReport& r) {
  out << std::left << std::setw(24) << "corpus" << std::right << std::setw(10) << "tokens" << std::setw(10)
      << "accuracy" << '\n';
  std::size_t total = 0;
  for (const auto& c : r.corpora) {
    out << std::left << std::setw(24) << c.name << std::right << std::setw(10) << c.total << std::setw(10)
        << fixed2(c.accuracy) << '\n';
    total += c.total;
  }
  out << std::left << std::setw(24) << "all as one" << std::right << std::setw(10) << total << std::setw(10)
      << fixed2(r.overall) << '\n';
  out << std::left << std::setw(24) << "average" << std::right << std::setw(10) << "" << std::setw(10)
      << fixed2(r.macro) << '\n';
  auto list = [&](const char* title, const std::vector<RankedCount>& v) {
    out << title << ":";
    for (const auto& e : v) out << ' ' << e.key << " (" << e.count << ")";
    out << '\n';
  };
  list("top mistaken tokens", r.top_mistaken_tokens);
  list("top under-predicted tags", r.top_under_predicted);
  list("top over-predicted tags", r.top_over_predicted);
}

struct EdmScore {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(predicted); }
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gold); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
  }
  EdmScore& operator+=(const EdmScore& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
};

// Triples match on predicates and role, and on spans when both sides carry them.
inline bool triples_match(const DependencyTriple& a, const DependencyTriple& b) {
  if (a.head_pred != b.head_pred || a.role != b.role || a.dep_pred != b.dep_pred) return false;
  if (a.anchored() && b.anchored()) return a.head_span == b.head_span && a.dep_span == b.dep_span;
  return true;
}

inline EdmScore edm_counts(const std::vector<DependencyTriple>& gold, const std::vector<DependencyTriple>& predicted) {
  EdmScore s{0, predicted.size(), gold.size()};
  std::vector<char> used(gold.size(), 0);
  for (const auto& p : predicted)
    for (std::size_t i = 0; i < gold.size(); ++i)
      if (!used[i] && triples_match(gold[i], p)) {
        used[i] = 1;
        ++s.matched;
        break;
      }
  return s;
}

// Micro-averaged over sentences; unparsed sentences contribute gold triples only.
inline EdmScore eval_edm(const Corpus& gold, const std::vector<SentenceParse>& predicted) {
  std::map<std::string, const SentenceParse*> by_id;
  for (const auto& p : predicted) by_id[p.id] = &p;
  EdmScore total;
  for (const auto& s : gold.sentences) {
    if (!s.gold_triples) throw Error("sentence '" + s.id + "' has no gold triples");
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw AlignmentError(s.id, "no parse output for sentence");
    total += edm_counts(*s.gold_triples, it->second->triples);
  }
  return total;
}

inline bool same_multiset(std::vector<DependencyTriple> a, std::vector<DependencyTriple> b) {
  if (a.size() != b.size()) return false;
  auto c = edm_counts(a, b);
  return c.matched == a.size();
}

// A sentence matches when it parsed and its triples equal the gold triples.
inline double exact_match_rate(const Corpus& gold, const std::vector<SentenceParse>& predicted) {
  if (gold.sentences.empty()) return 0.0;
  std::map<std::string, const SentenceParse*> by_id;
  for (const auto& p : predicted) by_id[p.id] = &p;
  std::size_t hits = 0;
  for (const auto& s : gold.sentences) {
    auto it = by_id.find(s.id);
    if (it == by_id.end() || it->second->status != ParseStatus::parsed || !s.gold_triples) continue;
    if (same_multiset(*s.gold_triples, it->second->triples)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.sentences.size());
}

inline double coverage(const std::vector<SentenceParse>& parses) {
  if (parses.empty()) return 0.0;
  auto n = std::count_if(parses.begin(), parses.end(),
                         [](const SentenceParse& p) { return p.status == ParseStatus::parsed; });
  return static_cast<double>(n) / static_cast<double>(parses.size());
}

struct ParseEvalReport {
  std::string corpus;
  EdmScore edm;
  double exact_match = 0;
  double coverage = 0;
  double sec_per_sen = 0;
};

inline ParseEvalReport eval_parses(const Corpus& gold, const std::vector<SentenceParse>& predicted) {
  ParseEvalReport r;
  r.corpus = gold.name;
  r.edm = eval_edm(gold, predicted);
  r.exact_match = exact_match_rate(gold, predicted);
  r.coverage = coverage(predicted);
  double t = 0;
  for (const auto& p : predicted) t += p.stats.wall_time;
  r.sec_per_sen = predicted.empty() ? 0.0 : t / static_cast<double>(predicted.size());
  return r;
}

inline void print_report(std::ostream& out, const ParseEvalReport& r) {
  out << "corpus " << r.corpus << ": P " << fixed2(r.edm.precision()) << "  R " << fixed2(r.edm.recall()) << "  F1 "
      << fixed2(r.edm.f1()) << "  exact " << fixed2(r.exact_match) << "  coverage " << fixed2(r.coverage)
      << "  sec/sen " << std::setprecision(4) << r.sec_per_sen << '\n';
}

}  // namespace stag
