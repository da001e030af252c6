// Generates the bundled toy corpora from the toy grammar. Sentences come from
// a small phrase-structure template; gold lexical types and triples are the
// best derivation of the parser itself.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stag/stag.hpp"

namespace {

using namespace stag;

struct Word {
  std::string form;
  std::string lextype;
};

class SentenceGenerator {
 public:
  struct Shape {
    double pp = 0.2;         // PP attachment probability at depth 0
    double compound = 0.15;  // noun-noun compound probability
    double adj = 0.25;
    int max_depth = 2;
  };

  SentenceGenerator(const Grammar& g, std::uint64_t seed) : rng_(seed) {
    for (const auto& e : g.lexicon) by_type_[e.lextype].push_back(e.orth);
  }

  std::vector<Word> sentence(const Shape& shape) {
    std::vector<Word> out;
    if (chance(0.07)) {
      np(out, shape, 0);
      return out;
    }
    np(out, shape, 0);
    vp(out, shape, 0);
    return out;
  }

 private:
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  void word(std::vector<Word>& out, const std::string& lextype) {
    const auto& forms = by_type_.at(lextype);
    out.push_back({forms[std::uniform_int_distribution<std::size_t>(0, forms.size() - 1)(rng_)], lextype});
  }

  std::string pick(const std::vector<std::pair<std::string, double>>& options) {
    double total = 0;
    for (const auto& o : options) total += o.second;
    double x = std::uniform_real_distribution<double>(0, total)(rng_);
    for (const auto& o : options) {
      if (x < o.second) return o.first;
      x -= o.second;
    }
    return options.back().first;
  }

  void nbar(std::vector<Word>& out, const Shape& shape, int depth, const std::string& head) {
    if (chance(shape.adj)) word(out, "aj_-_i_le");
    if (chance(shape.compound)) word(out, pick({{"n_-_c_le", 2}, {"n_-_mc_le", 1}, {"n_-_pl_le", 1}}));
    word(out, head);
    if (depth < shape.max_depth && chance(shape.pp / (1 + depth))) pp(out, shape, depth + 1, "p_np_i_le");
  }

  void np(std::vector<Word>& out, const Shape& shape, int depth) {
    auto kind = pick({{"det", 50}, {"bare", 15}, {"name", 9}, {"pron", 7}});
    if (kind == "det") {
      word(out, pick({{"d_-_the_le", 4}, {"d_-_a_le", 2}, {"d_-_dem_le", 1}, {"d_-_poss_le", 1.5}, {"d_-_quant_le", 1}}));
      nbar(out, shape, depth, pick({{"n_-_c_le", 5}, {"n_-_pl_le", 2}, {"n_-_mc_le", 1.5}}));
    } else if (kind == "bare") {
      nbar(out, shape, depth, pick({{"n_-_pl_le", 2}, {"n_-_mc_le", 1}}));
    } else if (kind == "name") {
      word(out, "n_-_pn_le");
    } else {
      word(out, "n_-_pr_le");
    }
  }

  void pp(std::vector<Word>& out, const Shape& shape, int depth, const std::string& prep) {
    word(out, prep);
    np(out, shape, depth);
  }

  void vp(std::vector<Word>& out, const Shape& shape, int depth) {
    auto kind = pick({{"v_-_le", 30}, {"v_np_le", 35}, {"v_pp_le", 15}, {"v_prd_le", 10}});
    word(out, kind);
    if (kind == "v_np_le") np(out, shape, depth + 1);
    if (kind == "v_pp_le") pp(out, shape, depth + 1, "p_np_sel_le");
    if (kind == "v_prd_le") word(out, "aj_-_i_le");
    if (chance(0.15)) word(out, "av_-_i_le");
    if (chance(shape.pp)) pp(out, shape, depth + 1, "p_np_i_le");
  }

  std::mt19937_64 rng_;
  std::map<std::string, std::vector<std::string>> by_type_;
};

std::string pos_for(const std::string& lextype, const std::string& form) {
  static const std::set<std::string> past = {"saw", "ran", "ate", "sang", "wrote", "rang", "found", "slept",
                                             "was", "were", "read"};
  if (lextype == "d_-_poss_le") return "PRP$";
  if (lextype.rfind("d_", 0) == 0) return "DT";
  if (lextype == "n_-_pl_le") return "NNS";
  if (lextype == "n_-_pn_le") return "NNP";
  if (lextype == "n_-_pr_le") return "PRP";
  if (lextype.rfind("n_", 0) == 0) return "NN";
  if (lextype.rfind("p_", 0) == 0) return "IN";
  if (lextype.rfind("aj_", 0) == 0) return "JJ";
  if (lextype.rfind("av_", 0) == 0) return "RB";
  auto lower = util::to_lower(form);
  if (past.count(lower) || (lower.size() > 2 && lower.substr(lower.size() - 2) == "ed")) return "VBD";
  if (lower == "is" || (lower.size() > 1 && lower.back() == 's')) return "VBZ";
  return "VBP";
}

Sentence make_sentence(const std::string& id, const std::vector<Word>& words) {
  Sentence s;
  s.id = id;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto form = words[i].form;
    if (i == 0 && !form.empty() && form[0] >= 'a' && form[0] <= 'z') form[0] = static_cast<char>(form[0] - 'a' + 'A');
    if (i > 0) s.raw_text += ' ';
    std::size_t start = s.raw_text.size();
    s.raw_text += form;
    Token t;
    t.form = form;
    t.span = {start, s.raw_text.size()};
    s.tokens.push_back(t);
  }
  return s;
}

// Fills gold tags, triples and (noisy) POS from the best derivation; false if
// the sentence does not parse under the given configuration.
bool treebank(const Grammar& g, Sentence& s, const PruneConfig& prune, std::mt19937_64& rng, double pos_noise) {
  auto r = parse(g, s, prune);
  auto best = select_best(r);
  if (!best) return false;
  auto tags = best->lextypes();
  s.gold_triples = extract_triples(*best);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    auto& t = s.tokens[i];
    t.gold_tag = tags[i];
    t.pos = pos_for(tags[i], t.form);
    if (u(rng) < pos_noise) {
      std::vector<std::string> others;
      for (const auto* e : g.lexical_lookup(t.form)) {
        auto p = pos_for(e->lextype, t.form);
        if (p != t.pos) others.push_back(p);
      }
      if (!others.empty()) t.pos = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
    }
  }
  return true;
}

Corpus generate(const Grammar& g, SentenceGenerator& gen, std::mt19937_64& rng, const std::string& name,
                const std::string& prefix, std::size_t count, const SentenceGenerator::Shape& shape,
                std::size_t min_len, std::size_t max_len, bool oracle, std::set<std::string>& seen) {
  Corpus c;
  c.name = name;
  std::size_t attempts = 0;
  while (c.sentences.size() < count) {
    if (++attempts > count * 200) throw Error("could not generate enough sentences for " + name);
    auto words = gen.sentence(shape);
    if (words.size() < min_len || words.size() > max_len) continue;
    char id[32];
    std::snprintf(id, sizeof id, "%s%04zu", prefix.c_str(), c.sentences.size() + 1);
    auto s = make_sentence(id, words);
    if (!seen.insert(s.raw_text).second) continue;
    PruneConfig prune;
    if (oracle) {
      auto p = std::make_shared<ExternalPredictions>();
      for (std::size_t i = 0; i < words.size(); ++i) p->add(s.id, {s.tokens[i].span, words[i].lextype, 1.0});
      prune = PruneConfig::supertag(p);
    }
    if (!treebank(g, s, prune, rng, 0.08)) continue;
    validate_sentence(s);
    c.sentences.push_back(std::move(s));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the toy corpora from the toy grammar"};
  std::string grammar_path = "data/toy.grammar";
  std::string out_dir = "data";
  std::uint64_t seed = 7;
  std::size_t train = 2000, dev = 300, test = 300, stress = 60;
  app.add_option("--grammar", grammar_path, "grammar file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--train", train, "training sentences");
  app.add_option("--dev", dev, "development sentences");
  app.add_option("--test", test, "test sentences");
  app.add_option("--stress", stress, "ambiguity-stress sentences");
  CLI11_PARSE(app, argc, argv);

  try {
    auto g = Grammar::load(grammar_path);
    SentenceGenerator gen(g, seed);
    std::mt19937_64 rng(seed + 1);
    std::set<std::string> seen;
    SentenceGenerator::Shape main_shape;
    SentenceGenerator::Shape stress_shape{0.85, 0.45, 0.4, 4};
    std::filesystem::create_directories(out_dir);
    auto write = [&](const Corpus& c, const std::string& file) {
      save_corpus(std::filesystem::path(out_dir) / file, c, CorpusFormat::jsonl);
      std::cout << file << ": " << c.sentences.size() << " sentences, " << c.token_count() << " tokens\n";
    };
    auto tr = generate(g, gen, rng, "toy-train", "tr", train, main_shape, 2, 12, false, seen);
    auto dv = generate(g, gen, rng, "toy-dev", "dv", dev, main_shape, 2, 12, false, seen);
    auto ts = generate(g, gen, rng, "toy-test", "ts", test, main_shape, 2, 12, false, seen);
    auto st = generate(g, gen, rng, "stress", "st", stress, stress_shape, 14, 26, true, seen);
    write(tr, "toy-train.jsonl");
    write(dv, "toy-dev.jsonl");
    write(ts, "toy-test.jsonl");
    write(st, "stress.jsonl");
    std::ofstream tags(std::filesystem::path(out_dir) / "toy-tags.txt");
    for (const auto& t : tag_inventory(concatenate({tr, dv, ts, st}))) tags << t << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
