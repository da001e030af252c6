#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace stag;
using stag::testing::make_sentence;

TEST(Viterbi, MatchesEnumerationWithTies) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t K = 1 + rng() % 6, n = 1 + rng() % 5, F = 4;
    auto m = oracle::random_crf(rng, K, F, trial % 2 == 0);
    auto xs = oracle::random_inputs(rng, n, F);
    auto got = viterbi(m, xs);
    auto want = oracle::enumerate(m, xs);
    EXPECT_EQ(got.tags, want.best) << "trial " << trial;
    if (trial % 2 == 0)
      EXPECT_EQ(got.score, want.best_score) << "trial " << trial;  // dyadic weights sum exactly
    else
      EXPECT_NEAR(got.score, want.best_score, 1e-12 * (1 + std::abs(want.best_score))) << "trial " << trial;
  }
}

TEST(Viterbi, ZeroWeightsPickSmallestTag) {
  CrfModel m({"a", "b", "c"}, 2);
  std::vector<FeatureVector> xs(4, FeatureVector{{0, 1}});
  EXPECT_EQ(viterbi(m, xs).tags, (std::vector<std::size_t>{0, 0, 0, 0}));
}

TEST(Viterbi, SingleTokenIsArgmaxOfEmissionStartEnd) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = oracle::random_crf(rng, 5, 3, false);
    auto xs = oracle::random_inputs(rng, 1, 3);
    std::size_t best = 0;
    double mx = -1e300;
    for (std::size_t y = 0; y < 5; ++y) {
      double s = m.start[y] + m.end[y];
      for (auto f : xs[0].ids) s += m.emission.at(f, y);
      if (s > mx) {
        mx = s;
        best = y;
      }
    }
    EXPECT_EQ(viterbi(m, xs).tags, std::vector<std::size_t>{best});
  }
}

TEST(Viterbi, EmptyInput) {
  CrfModel m({"a"}, 1);
  EXPECT_TRUE(viterbi(m, std::vector<FeatureVector>{}).tags.empty());
}

TEST(Viterbi, BeatsRandomSequences) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto m = oracle::random_crf(rng, 6, 5, false);
    auto xs = oracle::random_inputs(rng, 8, 5);
    auto best = viterbi(m, xs).score;
    for (int r = 0; r < 1000; ++r) {
      std::vector<std::size_t> ys(8);
      for (auto& y : ys) y = rng() % 6;
      EXPECT_GE(best, oracle::path_score(m, xs, ys));
    }
  }
}

TEST(Crf, LogPartitionMatchesEnumeration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t K = 1 + rng() % 6, n = 1 + rng() % 5;
    auto m = oracle::random_crf(rng, K, 4, false);
    auto xs = oracle::random_inputs(rng, n, 4);
    EXPECT_NEAR(log_partition(m, xs), oracle::enumerate(m, xs).log_z, 1e-9);
  }
}

TEST(Crf, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  auto m = oracle::random_crf(rng, 3, 4, false);
  auto xs = oracle::random_inputs(rng, 3, 4);
  std::vector<std::size_t> ys{0, 2, 1};
  EXPECT_LT(oracle::gradient_relative_error(m, xs, ys), 1e-4);
}

TEST(TrainCrf, SingleTagCorpus) {
  Corpus c{"one", {make_sentence("1", {"a", "b", "c"}, {"X", "X", "X"}, {"t", "t", "t"})}};
  auto m = train_crf(c, {}, {});
  auto p = viterbi(m, c.sentences[0]);
  for (const auto& t : p.tags) EXPECT_EQ(t.tag, "t");
}

TEST(TrainCrf, RejectsAutoregressiveTemplate) {
  TemplateConfig ar;
  ar.autoregressive = true;
  EXPECT_THROW(train_crf(stag::testing::bundled("toy-dev"), ar, {}), std::invalid_argument);
}

TEST(TrainCrf, EmptyCorpusIsError) { EXPECT_THROW(train_crf(Corpus{}, {}, {}), Error); }

TEST(TrainCrf, LearnsToyDataDeterministically) {
  const auto& dev = stag::testing::bundled("toy-dev");
  const auto& test = stag::testing::bundled("toy-test");
  CrfTrainOptions opt;
  opt.epochs = 6;
  auto a = train_crf(dev, {}, opt, &test);
  auto b = train_crf(dev, {}, opt, &test);
  EXPECT_EQ(a.emission.data(), b.emission.data());
  EXPECT_EQ(a.transition.data(), b.transition.data());
  std::size_t ok = 0;
  for (const auto& s : test.sentences) {
    auto p = viterbi(a, s);
    for (std::size_t i = 0; i < s.size(); ++i) ok += p.tags[i].tag == *s.tokens[i].gold_tag;
  }
  EXPECT_GT(static_cast<double>(ok) / static_cast<double>(test.token_count()), 0.85);
}

TEST(TrainCrf, MarginalScoresAreProbabilities) {
  const auto& dev = stag::testing::bundled("toy-dev");
  CrfTrainOptions opt;
  opt.epochs = 2;
  auto m = train_crf(dev, {}, opt);
  for (std::size_t i = 0; i < 20; ++i)
    for (const auto& t : viterbi(m, dev.sentences[i]).tags) {
      EXPECT_GT(t.score, 0.0);
      EXPECT_LE(t.score, 1.0 + 1e-12);
    }
}
