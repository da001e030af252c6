#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace stag;

namespace {

const Grammar& toy() { return stag::testing::toy_grammar(); }

const char* kMini = R"(TYPES
sign
word < sign
phrase < sign
head
n < head
v < head
noun < word
verb < word

CONSTRAINTS
sign: HEAD = head
noun: HEAD = n
verb: HEAD = v

RULES
hv := 2 head=1 roles=[ARG1]
  MOTHER = phrase
  MOTHER.HEAD = DTR1.HEAD
  DTR0.HEAD = n
  DTR1.HEAD = v

START
phrase

LEXICON
dogs	noun	_dog_n
bark	verb	_bark_v
bark	noun	_bark_n	bark-n1
)";

Grammar load(const std::string& text) {
  std::istringstream in(text);
  return Grammar::parse(in);
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST(Grammar, ToyGrammarShape) {
  EXPECT_GE(toy().types.size(), 40u);
  EXPECT_EQ(toy().rules.size(), 10u);
  EXPECT_GE(toy().lexicon.size(), 300u);
  EXPECT_EQ(toy().types.name(toy().start), "root");
  for (const auto& r : toy().rules) {
    EXPECT_LT(r.head_index, r.arity);
    EXPECT_EQ(static_cast<int>(r.roles.size()), r.arity - 1);
  }
}

TEST(Grammar, BarkHasTwoSenses) {
  auto entries = toy().lexical_lookup("bark");
  ASSERT_EQ(entries.size(), 2u);
  std::set<std::string> preds{entries[0]->predicate, entries[1]->predicate};
  EXPECT_EQ(preds, (std::set<std::string>{"_bark_n", "_bark_v"}));
}

TEST(Grammar, CaseFoldedFallback) {
  auto lower = toy().lexical_lookup("bark");
  auto upper = toy().lexical_lookup("Bark");
  EXPECT_EQ(lower, upper);
}

TEST(Grammar, UnknownFormHasNoEntries) { EXPECT_TRUE(toy().lexical_lookup("xyzzy").empty()); }

TEST(Grammar, LexicalEntriesCarryTheirTypeConstraint) {
  const auto& h = toy().types;
  for (const auto& e : toy().lexicon) {
    EXPECT_EQ(e.fs.type(), e.type);
    if (const auto* c = h.constraint(e.type)) {
      EXPECT_TRUE(subsumes(h, *c, e.fs));
    }
  }
}

TEST(Grammar, ConstraintsInheritFromParents) {
  const auto& h = toy().types;
  auto v = *h.constraint(h.id("v_np_le"));
  auto head = v.follow(0, h.attribute("HEAD"));
  ASSERT_TRUE(head);
  EXPECT_EQ(v.type(*head), h.id("verb-head"));
  auto root = v.follow(0, h.attribute("ROOT"));
  ASSERT_TRUE(root);
  EXPECT_EQ(v.type(*root), h.id("-"));
}

TEST(Grammar, MiniGrammarLoads) {
  auto g = load(kMini);
  EXPECT_EQ(g.rules.size(), 1u);
  EXPECT_EQ(g.lexicon.size(), 3u);
  auto bark = g.lexical_lookup("bark");
  ASSERT_EQ(bark.size(), 2u);
  EXPECT_EQ(bark[0]->id, "bark-n1");
  EXPECT_EQ(bark[1]->id, "bark@verb");
  EXPECT_NE(g.find_rule("hv"), nullptr);
  EXPECT_EQ(g.find_rule("nope"), nullptr);
}

TEST(Grammar, MiniGrammarParses) {
  auto g = load(kMini);
  auto s = stag::testing::make_sentence("1", {"dogs", "bark"});
  auto r = parse(g, s, PruneConfig::none());
  EXPECT_EQ(r.status, ParseStatus::parsed);
  auto best = select_best(r);
  ASSERT_TRUE(best);
  EXPECT_EQ(extract_triples(*best), (std::vector<DependencyTriple>{{"_bark_v", "ARG1", "_dog_n", TokenRange{1, 2}, TokenRange{0, 1}}}));
}

TEST(GrammarErrors, CycleInTypes) {
  EXPECT_THROW(load(replace(kMini, "sign\n", "sign < verb\n")), GrammarError);
}

TEST(GrammarErrors, AmbiguousMeetNamesThePair) {
  try {
    load(replace(kMini, "verb < word\n", "verb < word\nx < n v\ny < n v\n"));
    FAIL() << "expected GrammarError";
  } catch (const GrammarError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("'n'"), std::string::npos);
    EXPECT_NE(what.find("'v'"), std::string::npos);
  }
}

TEST(GrammarErrors, UnknownTypeInConstraint) {
  try {
    load(replace(kMini, "noun: HEAD = n", "noun: HEAD = nn"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 13u);
  }
}

TEST(GrammarErrors, InconsistentConstraint) {
  EXPECT_THROW(load(replace(kMini, "noun: HEAD = n", "noun: HEAD = n\nnoun: HEAD = v")), Error);
}

TEST(GrammarErrors, RecursiveConstraint) {
  auto text = replace(kMini, "verb: HEAD = v", "verb: HEAD = v\nn: ARG = v\nv: ARG = n");
  EXPECT_THROW(load(text), GrammarError);
}

TEST(GrammarErrors, RulePathMustStartWithMotherOrDaughter) {
  EXPECT_THROW(load(replace(kMini, "  DTR1.HEAD = v", "  DTR2.HEAD = v")), ParseError);
  EXPECT_THROW(load(replace(kMini, "  DTR1.HEAD = v", "  HEAD = v")), ParseError);
}

TEST(GrammarErrors, HeadIndexOutOfRange) {
  EXPECT_THROW(load(replace(kMini, "head=1", "head=2")), ParseError);
}

TEST(GrammarErrors, RoleCountMustMatchArity) {
  EXPECT_THROW(load(replace(kMini, "roles=[ARG1]", "roles=[]")), ParseError);
}

TEST(GrammarErrors, InconsistentRule) {
  EXPECT_THROW(load(replace(kMini, "  DTR1.HEAD = v", "  DTR1.HEAD = v\n  DTR1 = noun")), GrammarError);
}

TEST(GrammarErrors, LexicalTypeMustBeLeaf) {
  EXPECT_THROW(load(replace(kMini, "dogs\tnoun", "dogs\tword")), ParseError);
}

TEST(GrammarErrors, UnknownLexicalType) {
  EXPECT_THROW(load(replace(kMini, "dogs\tnoun", "dogs\tnone")), ParseError);
}

TEST(GrammarErrors, LexiconColumns) {
  EXPECT_THROW(load(replace(kMini, "dogs\tnoun\t_dog_n", "dogs\tnoun")), ParseError);
}

TEST(GrammarErrors, MissingStart) {
  EXPECT_THROW(load(replace(kMini, "START\nphrase\n", "")), GrammarError);
}

TEST(GrammarErrors, ContentBeforeFirstSection) {
  EXPECT_THROW(load(std::string("oops\n") + kMini), ParseError);
}
