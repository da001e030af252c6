#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "test_util.hpp"

using namespace stag;
using stag::testing::make_sentence;
using stag::testing::separable_corpus;

namespace {

double training_accuracy(const LinearModel& m, const Corpus& c) {
  std::size_t ok = 0, n = 0;
  for (const auto& s : c.sentences) {
    auto p = predict_greedy(m, s);
    for (std::size_t i = 0; i < s.size(); ++i, ++n) ok += p[i].tag == *s.tokens[i].gold_tag;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST(TrainLinear, SeparableCorpusMaxEnt) {
  auto c = separable_corpus();
  EXPECT_DOUBLE_EQ(training_accuracy(train_linear(c, TrainConfig::maxent(), {}), c), 100.0);
}

TEST(TrainLinear, SeparableCorpusSvm) {
  auto c = separable_corpus();
  EXPECT_DOUBLE_EQ(training_accuracy(train_linear(c, TrainConfig::svm(), {}), c), 100.0);
}

TEST(TrainLinear, EmptyCorpusIsError) {
  EXPECT_THROW(train_linear(Corpus{}, TrainConfig::maxent(), {}), Error);
}

TEST(TrainLinear, SingleTagCorpusIsDegenerate) {
  Corpus c{"one", {make_sentence("1", {"a", "b"}, {"X", "X"}, {"t", "t"})}};
  auto m = train_linear(c, TrainConfig::maxent(), {});
  EXPECT_EQ(m.tags, std::vector<std::string>{"t"});
  EXPECT_EQ(predict_greedy(m, c.sentences[0])[1].tag, "t");
}

TEST(TrainLinear, HingeRequiresOvr) {
  auto cfg = TrainConfig::svm();
  cfg.scheme = Scheme::multinomial;
  EXPECT_THROW(train_linear(separable_corpus(), cfg, {}), std::invalid_argument);
}

TEST(TrainLinear, AutoregressiveFlagsMustAgree) {
  auto cfg = TrainConfig::maxent();
  cfg.autoregressive = true;
  EXPECT_THROW(train_linear(separable_corpus(), cfg, {}), std::invalid_argument);
}

TEST(TrainLinear, ObjectiveTraceNeverIncreases) {
  const auto& c = stag::testing::bundled("toy-dev");
  for (auto cfg : {TrainConfig::maxent(), TrainConfig::svm()}) {
    cfg.max_iter = 25;
    for (auto reg : {Regularization::l1, Regularization::l2}) {
      cfg.reg = reg;
      auto m = train_linear(c, cfg, {});
      ASSERT_EQ(m.objective_trace.size(), 25u);
      for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
        EXPECT_LE(m.objective_trace[i], m.objective_trace[i - 1]) << to_string(cfg.loss) << " epoch " << i;
    }
  }
}

TEST(TrainLinear, DeterministicGivenSeed) {
  const auto& c = stag::testing::bundled("toy-dev");
  auto cfg = TrainConfig::maxent();
  cfg.max_iter = 10;
  auto a = train_linear(c, cfg, {});
  auto b = train_linear(c, cfg, {});
  EXPECT_EQ(a.weights.data(), b.weights.data());
  EXPECT_EQ(a.bias, b.bias);
}

TEST(TrainLinear, SvmBeatsMajorityBaselineByTwentyPoints) {
  const auto& c = stag::testing::bundled("toy-train");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : c.sentences)
    for (const auto& t : s.tokens) ++counts[*t.gold_tag];
  std::size_t majority = 0;
  for (const auto& [t, n] : counts) majority = std::max(majority, n);
  double baseline = 100.0 * static_cast<double>(majority) / static_cast<double>(c.token_count());
  auto m = train_linear(c, TrainConfig::svm(), {});
  EXPECT_GE(training_accuracy(m, c), baseline + 20.0);
}

TEST(TrainLinear, MultinomialScoresFormDistribution) {
  const auto& c = stag::testing::bundled("toy-dev");
  auto cfg = TrainConfig::maxent();
  cfg.scheme = Scheme::multinomial;
  cfg.reg = Regularization::l2;
  cfg.max_iter = 10;
  auto m = train_linear(c, cfg, {});
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& s = c.sentences[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      auto p = normalize_scores(m, m.decision_scores(extract_features(s, j, std::nullopt, m.templ, m.vocab)));
      double z = 0;
      for (double v : p) z += v;
      EXPECT_NEAR(z, 1.0, 1e-9);
    }
  }
}

namespace {

// Hand-built model: word x prefers A, y weakly prefers A, a preceding A pushes towards B.
LinearModel crafted(bool autoregressive) {
  LinearModel m;
  m.tags = {"A", "B"};
  m.templ.autoregressive = autoregressive;
  m.config.autoregressive = autoregressive;
  m.vocab = Interner::from_strings({"w0=x", "w0=y", "t-1=A"});
  m.weights = WeightMatrix(3, 2);
  m.weights.at(0, 0) = 5;
  m.weights.at(1, 0) = 1;
  m.weights.at(2, 1) = 3;
  m.bias = {0, 0};
  return m;
}

}  // namespace

TEST(PredictGreedy, AutoregressiveUsesOwnPredictions) {
  auto s = make_sentence("s", {"x", "y", "z"});
  auto ar = predict_greedy(crafted(true), s);
  auto plain = predict_greedy(crafted(false), s);
  EXPECT_EQ(ar[1].tag, "B");
  EXPECT_EQ(plain[1].tag, "A");
}

TEST(PredictGreedy, TiesGoToSmallestTag) {
  auto s = make_sentence("s", {"unknown"});
  EXPECT_EQ(predict_greedy(crafted(false), s)[0].tag, "A");
}

TEST(PredictGreedy, EmptySentence) { EXPECT_TRUE(predict_greedy(crafted(false), Sentence{}).empty()); }

TEST(PredictGreedy, TemplateMismatchIsRejected) {
  TemplateConfig ar;
  ar.autoregressive = true;
  EXPECT_THROW(predict_greedy(crafted(false), make_sentence("s", {"x"}), ar), std::invalid_argument);
}

TEST(PredictGreedy, NonAutoregressiveIsPerTokenArgmax) {
  const auto& c = stag::testing::bundled("toy-dev");
  auto cfg = TrainConfig::maxent();
  cfg.max_iter = 10;
  auto m = train_linear(c, cfg, {});
  for (const auto& s : c.sentences) {
    auto p = predict_greedy(m, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto scores = m.decision_scores(extract_features(s, i, std::nullopt, m.templ, m.vocab));
      auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
      EXPECT_EQ(p[i].tag, m.tags[best]);
    }
  }
}

TEST(PredictGreedy, BatchOrderIrrelevant) {
  auto c = stag::testing::bundled("toy-dev");
  auto cfg = TrainConfig::maxent();
  cfg.max_iter = 5;
  auto m = train_linear(c, cfg, {});
  std::map<std::string, std::vector<std::string>> first;
  for (const auto& s : c.sentences)
    for (const auto& p : predict_greedy(m, s)) first[s.id].push_back(p.tag);
  std::mt19937 rng(2);
  std::shuffle(c.sentences.begin(), c.sentences.end(), rng);
  for (const auto& s : c.sentences) {
    std::vector<std::string> tags;
    for (const auto& p : predict_greedy(m, s)) tags.push_back(p.tag);
    EXPECT_EQ(tags, first[s.id]);
  }
}
