#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stag/corpus.hpp"

namespace stag {

using FeatureId = std::uint32_t;

// String <-> dense id vocabulary. Once frozen, unseen strings are absent.
class Interner {
 public:
  std::optional<FeatureId> find(const std::string& s) const {
    auto it = forward_.find(s);
    if (it == forward_.end()) return std::nullopt;
    return it->second;
  }

  // Adds s when not frozen; a frozen interner behaves like find().
  std::optional<FeatureId> intern(const std::string& s) {
    if (auto id = find(s)) return id;
    if (frozen_) return std::nullopt;
    auto id = static_cast<FeatureId>(reverse_.size());
    forward_.emplace(s, id);
    reverse_.push_back(s);
    return id;
  }

  const std::string& str(FeatureId id) const { return reverse_.at(id); }
  std::size_t size() const { return reverse_.size(); }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }
  const std::vector<std::string>& strings() const { return reverse_; }

  static Interner from_strings(std::vector<std::string> strings, bool frozen = true) {
    Interner in;
    for (auto& s : strings) {
      if (in.forward_.count(s)) throw ModelFormatError("duplicate vocabulary entry '" + s + "'");
      in.forward_.emplace(s, static_cast<FeatureId>(in.reverse_.size()));
      in.reverse_.push_back(std::move(s));
    }
    in.frozen_ = frozen;
    return in;
  }

 private:
  std::unordered_map<std::string, FeatureId> forward_;
  std::vector<std::string> reverse_;
  bool frozen_ = false;
};

// Binary sparse features: strictly increasing ids.
struct FeatureVector {
  std::vector<FeatureId> ids;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// The window is fixed at two tokens either side.
struct TemplateConfig {
  bool autoregressive = false;
  bool use_pos = true;
  static constexpr int window = 2;

  std::size_t features_per_token() const {
    return 5 + (use_pos ? 1 : 0) + (autoregressive ? 2 : 0);
  }
};

namespace sentinel {
inline const std::string bos1 = "<BOS1>";
inline const std::string bos2 = "<BOS2>";
inline const std::string eos1 = "<EOS1>";
inline const std::string eos2 = "<EOS2>";
inline const std::string bos_tag1 = "<BOS-T1>";
inline const std::string bos_tag2 = "<BOS-T2>";
}  // namespace sentinel

// Labels of the two preceding tokens, nearest first.
struct PrevTags {
  std::string t1;
  std::string t2;
};

// Previous-tag context at index, with sentinels at the sentence start.
inline PrevTags prev_tags_at(const std::vector<std::string>& tags, std::size_t index) {
  return {index >= 1 ? tags[index - 1] : sentinel::bos_tag1,
          index >= 2 ? tags[index - 2] : sentinel::bos_tag2};
}

// Named feature strings for one token, in template order.
inline std::vector<std::string> feature_strings(const Sentence& s, std::size_t index,
                                                const std::optional<PrevTags>& prev,
                                                const TemplateConfig& config) {
  if (index >= s.tokens.size())
    throw std::out_of_range("extract_features: index " + std::to_string(index) +
                            " outside sentence of length " + std::to_string(s.tokens.size()));
  if (config.autoregressive != prev.has_value())
    throw std::invalid_argument("extract_features: prev_tags must be given iff autoregressive");
  const auto n = s.tokens.size();
  auto word = [&](long offset) -> const std::string& {
    long j = static_cast<long>(index) + offset;
    if (j < 0) return offset == -1 ? sentinel::bos1 : sentinel::bos2;
    if (j >= static_cast<long>(n)) return offset == 1 ? sentinel::eos1 : sentinel::eos2;
    return s.tokens[static_cast<std::size_t>(j)].form;
  };
  std::vector<std::string> out;
  out.reserve(config.features_per_token());
  out.push_back("w0=" + word(0));
  out.push_back("w-1=" + word(-1));
  out.push_back("w-2=" + word(-2));
  out.push_back("w+1=" + word(1));
  out.push_back("w+2=" + word(2));
  if (config.use_pos) out.push_back("p0=" + s.tokens[index].pos);
  if (prev) {
    out.push_back("t-1=" + prev->t1);
    out.push_back("t-2=" + prev->t2);
  }
  return out;
}

// Maps feature strings through the interner; strings it does not know are dropped.
inline FeatureVector extract_features(const Sentence& s, std::size_t index,
                                      const std::optional<PrevTags>& prev,
                                      const TemplateConfig& config, Interner& vocab) {
  FeatureVector fv;
  for (const auto& f : feature_strings(s, index, prev, config))
    if (auto id = vocab.intern(f)) fv.ids.push_back(*id);
  std::sort(fv.ids.begin(), fv.ids.end());
  fv.ids.erase(std::unique(fv.ids.begin(), fv.ids.end()), fv.ids.end());
  return fv;
}

inline FeatureVector extract_features(const Sentence& s, std::size_t index,
                                      const std::optional<PrevTags>& prev,
                                      const TemplateConfig& config, const Interner& vocab) {
  FeatureVector fv;
  for (const auto& f : feature_strings(s, index, prev, config))
    if (auto id = vocab.find(f)) fv.ids.push_back(*id);
  std::sort(fv.ids.begin(), fv.ids.end());
  fv.ids.erase(std::unique(fv.ids.begin(), fv.ids.end()), fv.ids.end());
  return fv;
}

inline std::vector<std::string> gold_tags(const Sentence& s) {
  std::vector<std::string> tags;
  tags.reserve(s.size());
  for (const auto& t : s.tokens) {
    if (!t.gold_tag) throw Error("sentence '" + s.id + "' lacks gold tags");
    tags.push_back(*t.gold_tag);
  }
  return tags;
}

// Vocabulary over training extraction (gold previous tags), cutoff 1, frozen.
inline Interner build_vocabulary(const Corpus& train, const TemplateConfig& config) {
  // Sorted insertion makes ids independent of sentence order.
  std::vector<std::string> all;
  for (const auto& s : train.sentences) {
    std::vector<std::string> tags;
    if (config.autoregressive) tags = gold_tags(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::optional<PrevTags> prev;
      if (config.autoregressive) prev = prev_tags_at(tags, i);
      for (auto& f : feature_strings(s, i, prev, config)) all.push_back(std::move(f));
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return Interner::from_strings(std::move(all), true);
}

}  // namespace stag
