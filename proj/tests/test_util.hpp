#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stag/stag.hpp"

namespace stag::testing {

inline std::filesystem::path data_path(const std::string& file) { return std::filesystem::path(STAG_DATA_DIR) / file; }

inline const Grammar& toy_grammar() {
  static const Grammar g = Grammar::load(data_path("toy.grammar"));
  return g;
}

inline const Corpus& bundled(const std::string& name) {
  static std::map<std::string, Corpus> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, load_token_corpus(data_path(name + ".jsonl"))).first;
  return it->second;
}

// Sentence with single-space spans; tags are optional.
inline Sentence make_sentence(const std::string& id, const std::vector<std::string>& forms,
                              const std::vector<std::string>& pos = {}, const std::vector<std::string>& tags = {}) {
  Sentence s;
  s.id = id;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.form = forms[i];
    t.pos = pos.empty() ? "X" : pos[i];
    if (!tags.empty()) t.gold_tag = tags[i];
    s.tokens.push_back(t);
  }
  synthesize_spans(s);
  return s;
}

inline std::shared_ptr<ExternalPredictions> predictions_for(const Sentence& s, const std::vector<std::string>& tags) {
  auto p = std::make_shared<ExternalPredictions>();
  for (std::size_t i = 0; i < tags.size(); ++i) p->add(s.id, {s.tokens[i].span, tags[i], 1.0});
  return p;
}

// Two tags keyed uniquely by the word itself.
inline Corpus separable_corpus() {
  Corpus c{"sep", {}};
  std::mt19937 rng(5);
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> forms, tags;
    int n = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int k = 0; k < n; ++k) {
      int w = std::uniform_int_distribution<int>(0, 9)(rng);
      forms.push_back("w" + std::to_string(w));
      tags.push_back(w < 5 ? "low" : "high");
    }
    c.sentences.push_back(make_sentence(std::to_string(i), forms, std::vector<std::string>(forms.size(), "X"), tags));
  }
  return c;
}

// Random well-formed structures over the toy hierarchy: a few typed paths and
// path equalities, expanded with type constraints. Returns nullopt when the
// random description is inconsistent.
class RandomFs {
 public:
  RandomFs(const Grammar& g, std::uint64_t seed) : g_(g), rng_(seed) {
    for (const char* a : {"HEAD", "SPR", "COMPS", "SUBJ", "FIRST", "REST", "MOD", "ROOT", "OPT"})
      attrs_.push_back(g.types.attribute(a));
  }

  std::optional<FeatureStructure> draw() {
    FsBuilder b(g_.types, type());
    int paths = pick(0, 4);
    std::vector<Path> used;
    for (int i = 0; i < paths; ++i) {
      Path p;
      int len = pick(1, 3);
      for (int k = 0; k < len; ++k) p.push_back(attrs_[static_cast<std::size_t>(pick(0, static_cast<int>(attrs_.size()) - 1))]);
      try {
        b.type(p, type());
      } catch (const GrammarError&) {
        return std::nullopt;
      }
      used.push_back(p);
    }
    if (used.size() >= 2 && pick(0, 3) == 0) b.share(used[0], used[1]);
    return b.build(true);
  }

  // Draws until a consistent structure appears.
  FeatureStructure next() {
    for (;;)
      if (auto fs = draw()) return *fs;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  TypeId type() {
    // Bias towards general types so that random pairs often unify.
    if (pick(0, 2) == 0) return kTop;
    return static_cast<TypeId>(pick(0, static_cast<int>(g_.types.size()) - 1));
  }

  const Grammar& g_;
  std::mt19937_64 rng_;
  std::vector<AttrId> attrs_;
};

}  // namespace stag::testing
