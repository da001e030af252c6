#pragma once

#include <memory>
#include <variant>

#include "stag/model_io.hpp"
#include "stag/predictions.hpp"

namespace stag {

inline std::vector<TagPrediction> predict(const TaggerModel& model, const Sentence& s) {
  return std::visit(
      [&](const auto& m) -> std::vector<TagPrediction> {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>)
          return predict_greedy(m, s);
        else
          return viterbi(m, s).tags;
      },
      model);
}

inline ExternalPredictions predict_corpus(const TaggerModel& model, const Corpus& c) {
  ExternalPredictions out;
  for (const auto& s : c.sentences) {
    auto preds = predict(model, s);
    auto& v = out.by_sentence[s.id];
    for (std::size_t i = 0; i < preds.size(); ++i) v.push_back({s.tokens[i].span, preds[i].tag, preds[i].score});
  }
  return out;
}

inline std::vector<std::vector<std::string>> predicted_tags(const TagSource& src, const Corpus& c) {
  std::vector<std::vector<std::string>> out;
  out.reserve(c.sentences.size());
  for (const auto& s : c.sentences) out.push_back(src.tags_for(s));
  return out;
}

// Runs a trained model on demand.
class ModelTagSource : public TagSource {
 public:
  explicit ModelTagSource(std::shared_ptr<const TaggerModel> model) : model_(std::move(model)) {}
  std::vector<std::string> tags_for(const Sentence& s) const override {
    std::vector<std::string> out;
    for (auto& p : predict(*model_, s)) out.push_back(std::move(p.tag));
    return out;
  }

 private:
  std::shared_ptr<const TaggerModel> model_;
};

}  // namespace stag
