// Parses one sentence with and without supertag pruning and prints the
// surviving derivations and their dependency triples.

#include <iostream>

#include "stag/stag.hpp"

int main(int argc, char** argv) {
  using namespace stag;
  auto g = Grammar::load(argc > 1 ? argv[1] : "data/toy.grammar");

  Sentence s;
  s.id = "demo";
  s.raw_text = "The dog barks";
  s.tokens = {{"The", "DT", "d_-_the_le", {0, 3}}, {"dog", "NN", "n_-_c_le", {4, 7}}, {"barks", "VBZ", "v_-_le", {8, 13}}};

  auto show = [&](const char* title, const PruneConfig& p) {
    auto r = parse(g, s, p);
    std::cout << title << ": " << to_string(r.status) << ", " << r.stats.lexical_edges_kept << " lexical edges, "
              << r.stats.total_edges << " edges\n";
    for (const auto& d : derivations(r)) {
      std::cout << "  " << d.signature() << '\n';
      for (const auto& t : extract_triples(d)) std::cout << "    " << t.head_pred << ' ' << t.role << ' ' << t.dep_pred << '\n';
    }
  };

  Corpus c{"demo", {s}};
  show("unpruned", PruneConfig::none());
  show("gold supertags", PruneConfig::supertag(std::make_shared<ExternalPredictions>(ExternalPredictions::from_gold(c))));
}
