#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace stag;

namespace {

Corpus tsv(const std::string& text) {
  std::istringstream in(text);
  return read_tsv(in, "t");
}

}  // namespace

TEST(Corpus, TsvTwoTokens) {
  auto c = tsv("The\tDT\td-the\ndog\tNN\tn-c\n\n");
  ASSERT_EQ(c.sentences.size(), 1u);
  const auto& s = c.sentences[0];
  ASSERT_EQ(s.tokens.size(), 2u);
  EXPECT_EQ(s.tokens[0].span, (CharSpan{0, 3}));
  EXPECT_EQ(s.tokens[1].span, (CharSpan{4, 7}));
  EXPECT_EQ(s.raw_text, "The dog");
  EXPECT_EQ(*s.tokens[1].gold_tag, "n-c");
}

TEST(Corpus, EmptyFileHasNoSentences) {
  EXPECT_TRUE(tsv("").sentences.empty());
  std::istringstream in("");
  EXPECT_TRUE(read_jsonl(in).sentences.empty());
}

TEST(Corpus, TagColumnOptional) {
  auto c = tsv("# id = a\nKim\tNNP\n\n");
  EXPECT_EQ(c.sentences[0].id, "a");
  EXPECT_FALSE(c.sentences[0].tokens[0].gold_tag.has_value());
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  try {
    tsv("# id = a\nThe\tDT\n\n# id = b\nbroken\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 5u);
  }
}

TEST(Corpus, DuplicateIdIsValidationError) {
  EXPECT_THROW(tsv("# id = a\nx\tX\n\n# id = a\ny\tY\n\n"), ValidationError);
}

TEST(Corpus, TsvRoundTripIsByteIdentical) {
  std::string text = "# id = 1\nThe\tDT\td_-_the_le\ndog\tNN\tn_-_c_le\n\n# id = 2\nKim\tNNP\n\n";
  auto c = tsv(text);
  std::ostringstream out;
  write_tsv(out, c);
  EXPECT_EQ(out.str(), text);
}

TEST(Corpus, JsonlRoundTripKeepsSpansAndTriples) {
  const auto& c = stag::testing::bundled("toy-dev");
  std::ostringstream out;
  write_jsonl(out, c);
  std::istringstream in(out.str());
  auto back = read_jsonl(in, c.name);
  ASSERT_EQ(back.sentences.size(), c.sentences.size());
  for (std::size_t i = 0; i < c.sentences.size(); ++i) {
    EXPECT_EQ(back.sentences[i].raw_text, c.sentences[i].raw_text);
    EXPECT_EQ(back.sentences[i].gold_triples, c.sentences[i].gold_triples);
    for (std::size_t j = 0; j < c.sentences[i].size(); ++j)
      EXPECT_EQ(back.sentences[i].tokens[j].span, c.sentences[i].tokens[j].span);
  }
}

TEST(Corpus, JsonlFormMustMatchText) {
  std::istringstream in(R"({"id":"x","text":"The dog","tokens":[{"form":"The","pos":"DT","start":0,"end":3},{"form":"cat","pos":"NN","start":4,"end":7}]})");
  EXPECT_THROW(read_jsonl(in), ValidationError);
}

TEST(Corpus, JsonlOverlappingSpansRejected) {
  std::istringstream in(R"({"id":"x","text":"abc","tokens":[{"form":"ab","pos":"X","start":0,"end":2},{"form":"bc","pos":"X","start":1,"end":3}]})");
  EXPECT_THROW(read_jsonl(in), ValidationError);
}

TEST(PosCombo, SingletonPassesThrough) { EXPECT_EQ(map_pos_combo({"NN"}, {}), "NN"); }

TEST(PosCombo, UnseenFallsBackToFirstTag) { EXPECT_EQ(map_pos_combo({"DT", "NNP"}, {}), "DT"); }

TEST(PosCombo, DirectLookup) {
  PosComboMap m;
  m.entries[{"IN", "DT"}] = "IN";
  EXPECT_EQ(map_pos_combo({"IN", "DT"}, m), "IN");
}

TEST(PosCombo, EmptyComboIsRejected) { EXPECT_THROW(map_pos_combo({}, {}), std::invalid_argument); }

TEST(PosCombo, ResultIsMappedValueOrFirstTag) {
  std::istringstream in("IN+DT\tIN\nTO+VB\tVB\n");
  auto m = read_pos_combo_map(in);
  std::vector<std::string> inventory{"DT", "IN", "NN", "TO", "VB"};
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> combo;
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < n; ++k) combo.push_back(inventory[std::uniform_int_distribution<std::size_t>(0, 4)(rng)]);
    auto r = map_pos_combo(combo, m);
    EXPECT_EQ(r, map_pos_combo(combo, m));
    auto it = m.entries.find(combo);
    EXPECT_EQ(r, it == m.entries.end() || combo.size() == 1 ? combo[0] : it->second);
  }
}

TEST(PosCombo, MapFileRejectsSingleTagKeys) {
  std::istringstream in("NN\tNN\n");
  EXPECT_THROW(read_pos_combo_map(in), ParseError);
}

TEST(PosCombo, NormalizeRewritesCombinedFields) {
  auto c = tsv("in+the\tIN+DT\nbox\tNN\n\n");
  PosComboMap m;
  m.entries[{"IN", "DT"}] = "IN";
  EXPECT_EQ(normalize_pos(c, m), 1u);
  EXPECT_EQ(c.sentences[0].tokens[0].pos, "IN");
}

TEST(TagInventory, DedupAndSort) {
  auto c = tsv("x\tX\tb\ny\tX\ta\nz\tX\tb\n\n");
  EXPECT_EQ(tag_inventory(c), (std::vector<std::string>{"a", "b"}));
}

TEST(TagInventory, MissingGoldTagsIsError) { EXPECT_THROW(tag_inventory(tsv("x\tX\n\n")), Error); }

TEST(TagInventory, BundledCorporaMatchShippedTagList) {
  std::ifstream in(stag::testing::data_path("toy-tags.txt"));
  std::vector<std::string> shipped;
  for (std::string line; std::getline(in, line);) shipped.push_back(line);
  auto all = concatenate({stag::testing::bundled("toy-train"), stag::testing::bundled("toy-dev"),
                          stag::testing::bundled("toy-test"), stag::testing::bundled("stress")});
  EXPECT_EQ(tag_inventory(all), shipped);
}

namespace {

Corpus numbered(int n) {
  Corpus c{"ten", {}};
  for (int i = 0; i < n; ++i) c.sentences.push_back(stag::testing::make_sentence(std::to_string(i), {"w"}));
  return c;
}

}  // namespace

TEST(Split, RangesGiveEightOneOne) {
  auto parts = split_corpus(numbered(10), parse_split_spec("train:0-7,dev:8,test:9"));
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].sentences.size(), 8u);
  EXPECT_EQ(parts[1].sentences.size(), 1u);
  EXPECT_EQ(parts[2].sentences.size(), 1u);
  EXPECT_EQ(parts[0].sentences[3].id, "3");
}

TEST(Split, OverlapIsError) {
  EXPECT_THROW(split_corpus(numbered(10), parse_split_spec("train:0-8,dev:8,test:9")), Error);
}

TEST(Split, UnmatchedIdsAreListed) {
  try {
    split_corpus(numbered(10), parse_split_spec("train:0-7,test:9"));
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
  }
}

TEST(Split, GlobPatternsAndSizesSumToInput) {
  const auto& c = stag::testing::bundled("toy-dev");
  auto parts = split_corpus(c, parse_split_spec("a:dv00*|dv01*,b:dv02*|dv03*"));
  std::size_t total = 0;
  for (const auto& p : parts) total += p.sentences.size();
  EXPECT_EQ(total, c.sentences.size());
  EXPECT_EQ(parts[0].sentences.size(), 199u);
}
