#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace stag;
using stag::testing::make_sentence;
using stag::testing::predictions_for;

namespace {

const Grammar& toy() { return stag::testing::toy_grammar(); }

const Sentence& dog_barks() {
  static const Sentence s = make_sentence("s", {"The", "dog", "barks"});
  return s;
}

std::vector<std::string> lextypes_of(const std::vector<const LexicalEntry*>& v) {
  std::vector<std::string> out;
  for (const auto* e : v) out.push_back(e->lextype);
  return out;
}

}  // namespace

TEST(LexicalChart, PredictionPrunesOtherReadings) {
  ParseStats st;
  auto p = PruneConfig::supertag(predictions_for(dog_barks(), {"d_-_the_le", "n_-_c_le", "v_-_le"}));
  auto chart = build_lexical_chart(toy(), dog_barks(), p, st);
  EXPECT_EQ(lextypes_of(chart[2]), std::vector<std::string>{"v_-_le"});
  EXPECT_EQ(st.lexical_edges_kept, 3u);
  EXPECT_EQ(st.lexical_edges_pruned, 2u);
}

TEST(LexicalChart, FailSoftKeepsAllCandidates) {
  ParseStats st;
  auto p = PruneConfig::supertag(predictions_for(dog_barks(), {"d_-_the_le", "n_-_c_le", "p_np_i_le"}));
  auto chart = build_lexical_chart(toy(), dog_barks(), p, st);
  EXPECT_EQ(chart[2].size(), 2u);
  EXPECT_EQ(st.prune_misses, 1u);
}

TEST(LexicalChart, ExceptionTypeExemptsToken) {
  ParseStats st;
  auto p = PruneConfig::supertag(predictions_for(dog_barks(), {"d_-_the_le", "v_np_le", "v_-_le"}), {"n_-_c_le"});
  auto chart = build_lexical_chart(toy(), dog_barks(), p, st);
  EXPECT_EQ(chart[1].size(), 2u);
  EXPECT_EQ(chart[2].size(), 1u);
  EXPECT_EQ(st.exempt_tokens, 1u);
}

TEST(LexicalChart, SupertagModeNeedsPredictions) {
  ParseStats st;
  PruneConfig p{PruneMode::supertag, nullptr, {}};
  EXPECT_THROW(build_lexical_chart(toy(), dog_barks(), p, st), Error);
}

TEST(Parse, DogBarksHasSentenceAndFragmentReadings) {
  auto r = parse(toy(), dog_barks(), PruneConfig::none());
  EXPECT_EQ(r.status, ParseStatus::parsed);
  EXPECT_GE(r.roots.size(), 2u);
  std::set<std::string> mothers;
  for (auto id : r.roots) mothers.insert(r.edges[id].rule->name);
  EXPECT_TRUE(mothers.count("subj-head"));
  EXPECT_TRUE(mothers.count("frag-np"));
}

TEST(Parse, BestDerivationAndTriples) {
  auto r = parse(toy(), dog_barks(), PruneConfig::none());
  auto best = select_best(r);
  ASSERT_TRUE(best);
  EXPECT_EQ(best->signature(), "(subj-head (spec-head the@d_-_the_le dog@n_-_c_le) barks@v_-_le)");
  std::vector<DependencyTriple> want{{"_bark_v", "ARG1", "_dog_n", TokenRange{2, 3}, TokenRange{1, 2}},
                                     {"_dog_n", "SPEC", "_the_q", TokenRange{1, 2}, TokenRange{0, 1}}};
  EXPECT_EQ(extract_triples(*best), want);
}

TEST(Parse, OracleTagsKeepOnlyTheSententialReading) {
  auto none = parse_sentence(toy(), dog_barks(), PruneConfig::none());
  auto p = PruneConfig::supertag(predictions_for(dog_barks(), {"d_-_the_le", "n_-_c_le", "v_-_le"}));
  auto r = parse(toy(), dog_barks(), p);
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_EQ(extract_triples(derivation(r, r.roots[0])), none.triples);
}

TEST(Parse, SelectBestOnEmptyResult) { EXPECT_FALSE(select_best(ParseResult{}).has_value()); }

TEST(Parse, SingleWordHasNoTriples) {
  auto sp = parse_sentence(toy(), make_sentence("k", {"Kim"}), PruneConfig::none());
  EXPECT_EQ(sp.status, ParseStatus::parsed);
  EXPECT_TRUE(sp.triples.empty());
}

TEST(Parse, UnaryRulesAddNoTriples) {
  auto r = parse(toy(), make_sentence("k", {"dogs"}), PruneConfig::none());
  auto best = select_best(r);
  ASSERT_TRUE(best);
  EXPECT_GE(best->node_count(), 3u);
  EXPECT_TRUE(extract_triples(*best).empty());
}

TEST(Parse, LexicalGapIsNoParse) {
  auto r = parse(toy(), make_sentence("g", {"The", "xyzzy", "barks"}), PruneConfig::none());
  EXPECT_EQ(r.status, ParseStatus::no_parse);
  EXPECT_EQ(r.stats.lexical_gaps, 1u);
  EXPECT_TRUE(r.roots.empty());
}

TEST(Parse, BudgetAtSentenceLengthIsExceeded) {
  auto p = PruneConfig::supertag(predictions_for(dog_barks(), {"d_-_the_le", "n_-_c_le", "v_-_le"}));
  auto r = parse(toy(), dog_barks(), p, Budget{3});
  EXPECT_EQ(r.status, ParseStatus::budget_exceeded);
  EXPECT_TRUE(r.roots.empty());
  EXPECT_EQ(r.stats.total_edges, 4u);
}

TEST(Parse, BudgetBelowLengthIsRejected) { EXPECT_THROW(parse(toy(), dog_barks(), PruneConfig::none(), Budget{2}), Error); }

TEST(Parse, EdgeInvariants) {
  const auto& c = stag::testing::bundled("toy-dev");
  for (std::size_t i = 0; i < 40; ++i) {
    auto r = parse(toy(), c.sentences[i], PruneConfig::none());
    EXPECT_EQ(r.status == ParseStatus::parsed, !r.roots.empty());
    for (const auto& e : r.edges) {
      if (e.lexical()) {
        EXPECT_TRUE(e.daughters.empty());
        EXPECT_EQ(e.span.end, e.span.begin + 1);
        continue;
      }
      ASSERT_EQ(static_cast<int>(e.daughters.size()), e.rule->arity);
      EXPECT_EQ(r.edges[e.daughters.front()].span.begin, e.span.begin);
      EXPECT_EQ(r.edges[e.daughters.back()].span.end, e.span.end);
      if (e.daughters.size() == 2) {
        EXPECT_EQ(r.edges[e.daughters[0]].span.end, r.edges[e.daughters[1]].span.begin);
      }
      for (auto d : e.daughters) EXPECT_LT(d, e.id);
    }
  }
}

TEST(Parse, Deterministic) {
  const auto& s = stag::testing::bundled("stress").sentences[0];
  auto a = parse(toy(), s, PruneConfig::none());
  auto b = parse(toy(), s, PruneConfig::none());
  ASSERT_EQ(a.edges.size(), b.edges.size());
  EXPECT_EQ(a.roots, b.roots);
  for (std::size_t i = 0; i < a.edges.size(); ++i) EXPECT_EQ(a.edges[i].fs, b.edges[i].fs);
}

TEST(Pruning, OracleSoundnessOnBundledCorpus) {
  const auto& c = stag::testing::bundled("toy-test");
  auto oracle = std::make_shared<ExternalPredictions>(ExternalPredictions::from_gold(c));
  for (const auto& s : c.sentences) {
    auto none = parse(toy(), s, PruneConfig::none());
    auto pruned = parse(toy(), s, PruneConfig::supertag(oracle));
    EXPECT_LE(pruned.stats.lexical_edges_kept, none.stats.lexical_edges_kept);
    EXPECT_LE(pruned.stats.total_edges, none.stats.total_edges);
    bool all_single = true;
    for (const auto& t : s.tokens) all_single &= toy().lexical_lookup(t.form).size() == 1;
    EXPECT_EQ(pruned.stats.lexical_edges_kept == none.stats.lexical_edges_kept, all_single) << s.id;
  }
}

TEST(Pruning, RandomPredictionsNeverGrowTheChart) {
  const auto& c = stag::testing::bundled("toy-test");
  std::mt19937 rng(9);
  auto tags = tag_inventory(c);
  auto noisy = std::make_shared<ExternalPredictions>();
  for (const auto& s : c.sentences)
    for (const auto& t : s.tokens) {
      auto tag = rng() % 3 == 0 ? tags[rng() % tags.size()] : *t.gold_tag;
      noisy->add(s.id, {t.span, tag, 1.0});
    }
  std::set<std::string> exc{"v_-_le"};
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& s = c.sentences[i];
    auto none = parse(toy(), s, PruneConfig::none());
    for (const auto& p : {PruneConfig::supertag(noisy), PruneConfig::supertag(noisy, exc)}) {
      auto r = parse(toy(), s, p);
      EXPECT_LE(r.stats.lexical_edges_kept, none.stats.lexical_edges_kept);
      EXPECT_LE(r.stats.total_edges, none.stats.total_edges);
      EXPECT_EQ(r.stats.lexical_edges_kept + r.stats.lexical_edges_pruned, none.stats.lexical_edges_kept);
    }
  }
}

TEST(Budget, RaisingNeverLosesAParse) {
  const auto& c = stag::testing::bundled("stress");
  for (std::size_t i = 0; i < 15; ++i) {
    const auto& s = c.sentences[i];
    bool parsed = false;
    for (std::size_t b : {s.size(), 2 * s.size(), std::size_t{500}, std::size_t{2000}, std::size_t{20000}}) {
      auto r = parse(toy(), s, PruneConfig::none(), Budget{b});
      if (parsed) {
        EXPECT_EQ(r.status, ParseStatus::parsed) << s.id << " budget " << b;
      }
      parsed = r.status == ParseStatus::parsed;
    }
  }
}

namespace {

Corpus tagged(const std::vector<std::vector<std::string>>& tags) {
  Corpus c{"dev", {}};
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::vector<std::string> forms(tags[i].size(), "w");
    c.sentences.push_back(make_sentence(std::to_string(i), forms, {}, tags[i]));
  }
  return c;
}

}  // namespace

TEST(Exceptions, RankedByMistakes) {
  auto dev = tagged({{"a", "b", "c", "c"}, {"b", "c"}});
  std::vector<std::vector<std::string>> pred{{"a", "x", "x", "x"}, {"x", "c"}};
  EXPECT_EQ(compile_exceptions(dev, pred, 2), (std::vector<std::string>{"b", "c"}));
  auto ranked = rank_mistakes(dev, pred);
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].mistakes, 2u);
}

TEST(Exceptions, NeverListsCorrectlyPredictedTypes) {
  auto dev = tagged({{"a", "b"}});
  EXPECT_TRUE(compile_exceptions(dev, {{"a", "b"}}).empty());
}

TEST(Exceptions, KClampedToTagset) {
  auto dev = tagged({{"a", "b"}});
  EXPECT_EQ(compile_exceptions(dev, {{"b", "a"}}, 15).size(), 2u);
}

TEST(Exceptions, MisalignedPredictionsAreRejected) {
  auto dev = tagged({{"a", "b"}});
  EXPECT_THROW(compile_exceptions(dev, {{"a"}}), AlignmentError);
}

TEST(Exceptions, FileFormat) {
  std::istringstream in("# top types\nv_-_le\n\n n_-_c_le \n");
  EXPECT_EQ(read_exceptions(in), (std::set<std::string>{"n_-_c_le", "v_-_le"}));
  std::ostringstream out;
  write_exceptions(out, {"x", "y"});
  EXPECT_EQ(out.str(), "x\ny\n");
}

TEST(ParseOutput, JsonRoundTrip) {
  auto sp = parse_sentence(toy(), dog_barks(), PruneConfig::none());
  auto j = to_json(sp);
  for (const char* k : {"id", "status", "triples", "stats"}) EXPECT_TRUE(j.contains(k));
  std::istringstream in(j.dump() + "\n");
  auto back = read_parses(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].triples, sp.triples);
  EXPECT_EQ(back[0].status, sp.status);
  EXPECT_EQ(back[0].stats.total_edges, sp.stats.total_edges);
}

TEST(ParseOutput, UnknownStatusIsError) { EXPECT_THROW(parse_status("maybe"), Error); }
