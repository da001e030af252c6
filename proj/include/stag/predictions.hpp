#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>
#include <vector>

#include "stag/corpus.hpp"

namespace stag {

// Anything that can supply one lexical-type prediction per token of a sentence.
class TagSource {
 public:
  virtual ~TagSource() = default;
  // Throws AlignmentError when no aligned predictions exist for s.
  virtual std::vector<std::string> tags_for(const Sentence& s) const = 0;
};

struct PredictedToken {
  CharSpan span;
  std::string tag;
  double score = 0;
};

// Per sentence id: predictions ordered by span. File format, one token per line:
//   sentence_id<TAB>start<TAB>end<TAB>tag<TAB>score
class ExternalPredictions : public TagSource {
 public:
  std::map<std::string, std::vector<PredictedToken>> by_sentence;

  void add(const std::string& id, PredictedToken p) { by_sentence[id].push_back(std::move(p)); }

  const std::vector<PredictedToken>& aligned(const Sentence& s) const {
    auto it = by_sentence.find(s.id);
    if (it == by_sentence.end()) throw AlignmentError(s.id, "no predictions for sentence");
    const auto& preds = it->second;
    if (preds.size() != s.tokens.size())
      throw AlignmentError(s.id, std::to_string(preds.size()) + " predictions for " +
                                     std::to_string(s.tokens.size()) + " tokens");
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i].span != s.tokens[i].span)
        throw AlignmentError(s.id, "prediction span [" + std::to_string(preds[i].span.start) + "," +
                                       std::to_string(preds[i].span.end) + ") does not match token " +
                                       std::to_string(i) + " '" + s.tokens[i].form + "'");
    return preds;
  }

  std::vector<std::string> tags_for(const Sentence& s) const override {
    std::vector<std::string> out;
    for (const auto& p : aligned(s)) out.push_back(p.tag);
    return out;
  }

  // Verifies alignment against every sentence of the corpus.
  void check_alignment(const Corpus& c) const {
    for (const auto& s : c.sentences) aligned(s);
  }

  // Oracle predictions built from the corpus' own gold tags.
  static ExternalPredictions from_gold(const Corpus& c) {
    ExternalPredictions p;
    for (const auto& s : c.sentences) {
      auto& v = p.by_sentence[s.id];
      for (const auto& t : s.tokens) {
        if (!t.gold_tag) throw Error("sentence '" + s.id + "' lacks gold tags");
        v.push_back({t.span, *t.gold_tag, 1.0});
      }
    }
    return p;
  }
};

inline ExternalPredictions read_predictions(std::istream& in) {
  ExternalPredictions p;
  std::string line;
  std::size_t lineno = 0;
  auto to_size = [&](const std::string& s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad offset '" + s + "'", lineno);
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty() || line.front() == '#') continue;
    auto cols = util::split(line, '\t');
    if (cols.size() != 5) throw ParseError("expected 5 tab-separated columns", lineno);
    PredictedToken t;
    t.span = {to_size(cols[1]), to_size(cols[2])};
    t.tag = cols[3];
    if (t.tag.empty()) throw ParseError("empty tag", lineno);
    try {
      std::size_t used = 0;
      t.score = std::stod(cols[4], &used);
      if (used != cols[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad score '" + cols[4] + "'", lineno);
    }
    p.add(cols[0], std::move(t));
  }
  for (auto& [id, preds] : p.by_sentence) {
    std::sort(preds.begin(), preds.end(),
              [](const PredictedToken& a, const PredictedToken& b) { return a.span < b.span; });
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].span.start >= preds[i].span.end) throw AlignmentError(id, "empty prediction span");
      if (i > 0 && preds[i].span.start < preds[i - 1].span.end)
        throw AlignmentError(id, "overlapping prediction spans");
    }
  }
  return p;
}

inline ExternalPredictions load_external_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions '" + path.string() + "'");
  return read_predictions(in);
}

inline void write_predictions(std::ostream& out, const ExternalPredictions& p) {
  auto flags = out.flags();
  out << std::setprecision(6);
  for (const auto& [id, preds] : p.by_sentence)
    for (const auto& t : preds)
      out << id << '\t' << t.span.start << '\t' << t.span.end << '\t' << t.tag << '\t' << t.score << '\n';
  out.flags(flags);
}

}  // namespace stag
