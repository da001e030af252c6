// Command-line front end: corpus conversion, tagger training and evaluation,
// exception lists, parsing, parse evaluation and benchmarking.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stag/stag.hpp"

namespace fs = std::filesystem;
using namespace stag;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string format;  // corpus output format; empty means infer from the path
  std::string out;     // output path; empty means standard output
};

// Writes to --out when given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<Corpus> load_corpora(const std::vector<std::string>& paths) {
  std::vector<Corpus> out;
  for (const auto& p : paths) out.push_back(load_token_corpus(p));
  return out;
}

std::shared_ptr<const TagSource> tag_source(const std::string& model_path, const std::string& predictions_path) {
  if (!model_path.empty() && !predictions_path.empty()) throw Error("give either --model or --predictions, not both");
  if (!model_path.empty()) return std::make_shared<ModelTagSource>(std::make_shared<TaggerModel>(load_model(model_path)));
  if (!predictions_path.empty())
    return std::make_shared<ExternalPredictions>(load_external_predictions(predictions_path));
  return nullptr;
}

void add_convert(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("convert-corpus", "Convert, normalize and split a token corpus");
  auto input = std::make_shared<std::string>();
  auto pos_map = std::make_shared<std::string>();
  auto split = std::make_shared<std::string>();
  cmd->add_option("input", *input, "input corpus (.tsv or .jsonl)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--pos-map", *pos_map, "POS combination map (A+B<TAB>POS lines)")->check(CLI::ExistingFile);
  cmd->add_option("--split", *split, "split spec, e.g. train:0-7,dev:8,test:9; --out is then a directory");
  cmd->callback([=, &g] {
    auto c = load_token_corpus(*input);
    if (!pos_map->empty()) {
      auto changed = normalize_pos(c, load_pos_combo_map(*pos_map));
      std::cerr << "normalized " << changed << " POS combinations\n";
    }
    if (split->empty()) {
      if (g.out.empty()) {
        auto format = g.format.empty() ? CorpusFormat::jsonl : parse_corpus_format(g.format);
        format == CorpusFormat::tsv ? write_tsv(std::cout, c) : write_jsonl(std::cout, c);
      } else {
        auto format = g.format.empty() ? corpus_format_from_path(g.out) : parse_corpus_format(g.format);
        save_corpus(g.out, c, format);
      }
      std::cerr << c.sentences.size() << " sentences, " << c.token_count() << " tokens\n";
      return;
    }
    if (g.out.empty()) throw Error("--split needs --out <directory>");
    auto format = g.format.empty() ? CorpusFormat::jsonl : parse_corpus_format(g.format);
    fs::create_directories(g.out);
    auto stem = fs::path(*input).stem().string();
    for (const auto& part : split_corpus(c, parse_split_spec(*split))) {
      auto path = fs::path(g.out) / (stem + "-" + part.name + (format == CorpusFormat::tsv ? ".tsv" : ".jsonl"));
      save_corpus(path, part, format);
      std::cerr << path.string() << ": " << part.sentences.size() << " sentences\n";
    }
  });
}

void add_train(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("train-tagger", "Train a MaxEnt, SVM or CRF supertagger");
  struct Opts {
    std::string train, dev, kind = "maxent", loss, scheme, reg;
    std::optional<double> c, lr;
    std::optional<int> max_iter;
    bool autoregressive = false, no_pos = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--train", o->train, "training corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dev", o->dev, "development corpus (CRF early stopping)")->check(CLI::ExistingFile);
  cmd->add_option("--model", o->kind, "maxent, svm, linear or crf")
      ->check(CLI::IsMember({"maxent", "svm", "linear", "crf"}));
  cmd->add_option("--loss", o->loss, "logistic or squared_hinge");
  cmd->add_option("--scheme", o->scheme, "ovr or multinomial");
  cmd->add_option("--reg", o->reg, "l1 or l2");
  cmd->add_option("--C", o->c, "inverse regularization strength");
  cmd->add_option("--max-iter", o->max_iter, "training epochs");
  cmd->add_option("--learning-rate", o->lr, "initial step size");
  cmd->add_flag("--autoregressive", o->autoregressive, "add the previous two tags as features");
  cmd->add_flag("--no-pos", o->no_pos, "drop the POS feature");
  cmd->callback([o, &g] {
    if (g.out.empty()) throw Error("train-tagger needs --out <model.json>");
    auto train = load_token_corpus(o->train);
    TemplateConfig templ;
    templ.autoregressive = o->autoregressive;
    templ.use_pos = !o->no_pos;
    if (o->kind == "crf") {
      CrfTrainOptions opt;
      opt.seed = g.seed;
      if (o->c) opt.l2_strength = 1.0 / *o->c;
      if (o->max_iter) opt.epochs = *o->max_iter;
      if (o->lr) opt.learning_rate = *o->lr;
      std::optional<Corpus> dev;
      if (!o->dev.empty()) dev = load_token_corpus(o->dev);
      auto m = train_crf(train, templ, opt, dev ? &*dev : nullptr);
      save_model(m, g.out);
      std::cerr << "saved CRF with " << m.num_tags() << " tags and " << m.vocab.size() << " features\n";
      return;
    }
    TrainConfig cfg = o->kind == "svm" ? TrainConfig::svm() : TrainConfig::maxent();
    if (!o->loss.empty()) cfg.loss = parse_loss(o->loss);
    if (!o->scheme.empty()) cfg.scheme = parse_scheme(o->scheme);
    if (!o->reg.empty()) cfg.reg = parse_regularization(o->reg);
    if (o->c) cfg.reg_strength = *o->c;
    if (o->max_iter) cfg.max_iter = *o->max_iter;
    if (o->lr) cfg.learning_rate = *o->lr;
    cfg.seed = g.seed;
    cfg.autoregressive = o->autoregressive;
    auto m = train_linear(train, cfg, templ);
    save_model(m, g.out);
    std::cerr << "saved " << o->kind << " model with " << m.tags.size() << " tags and " << m.vocab.size()
              << " features; final objective " << (m.objective_trace.empty() ? 0.0 : m.objective_trace.back())
              << '\n';
  });
}

void add_tag(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("tag", "Predict lexical types; writes the predictions file format");
  auto model = std::make_shared<std::string>();
  auto corpus = std::make_shared<std::string>();
  cmd->add_option("--model", *model, "trained model")->required()->check(CLI::ExistingFile);
  cmd->add_option("corpus", *corpus, "corpus to tag")->required()->check(CLI::ExistingFile);
  cmd->callback([=, &g] {
    auto m = load_model(*model);
    auto c = load_token_corpus(*corpus);
    Output out(g.out);
    write_predictions(out.stream(), predict_corpus(m, c));
  });
}

void add_eval_tagger(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("eval-tagger", "Tagging accuracy, confusion and error summary");
  auto corpora = std::make_shared<std::vector<std::string>>();
  auto model = std::make_shared<std::string>();
  auto predictions = std::make_shared<std::string>();
  auto confusion = std::make_shared<std::string>();
  cmd->add_option("corpora", *corpora, "gold corpora")->required()->check(CLI::ExistingFile);
  cmd->add_option("--model", *model, "trained model")->check(CLI::ExistingFile);
  cmd->add_option("--predictions", *predictions, "external predictions file")->check(CLI::ExistingFile);
  cmd->add_option("--confusion", *confusion, "write the confusion counts as CSV");
  cmd->callback([=, &g] {
    auto src = tag_source(*model, *predictions);
    if (!src) throw Error("eval-tagger needs --model or --predictions");
    auto gold = load_corpora(*corpora);
    std::vector<const Corpus*> refs;
    std::vector<std::vector<std::vector<std::string>>> pred;
    for (const auto& c : gold) {
      refs.push_back(&c);
      pred.push_back(predicted_tags(*src, c));
    }
    auto report = eval_tagging(refs, pred);
    Output out(g.out);
    print_report(out.stream(), report);
    if (!confusion->empty()) {
      std::ofstream cf(*confusion);
      cf << "gold,predicted,count\n";
      for (const auto& [key, n] : report.confusion) cf << key.first << ',' << key.second << ',' << n << '\n';
    }
  });
}

void add_compile_exceptions(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("compile-exceptions", "Top-k lexical types the tagger gets wrong on dev");
  auto dev = std::make_shared<std::string>();
  auto model = std::make_shared<std::string>();
  auto predictions = std::make_shared<std::string>();
  auto k = std::make_shared<std::size_t>(15);
  cmd->add_option("--dev", *dev, "gold development corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--model", *model, "trained model")->check(CLI::ExistingFile);
  cmd->add_option("--predictions", *predictions, "external predictions file")->check(CLI::ExistingFile);
  cmd->add_option("-k", *k, "list size");
  cmd->callback([=, &g] {
    auto src = tag_source(*model, *predictions);
    if (!src) throw Error("compile-exceptions needs --model or --predictions");
    auto c = load_token_corpus(*dev);
    auto list = compile_exceptions(c, predicted_tags(*src, c), *k);
    Output out(g.out);
    write_exceptions(out.stream(), list);
  });
}

struct ParseOpts {
  std::string grammar, model, predictions, exceptions, mode;
  std::size_t max_edges = Budget{}.max_edges;
};

void add_parse_options(CLI::App* cmd, ParseOpts& o) {
  cmd->add_option("--grammar", o.grammar, "grammar file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--model", o.model, "tagger model for supertag pruning")->check(CLI::ExistingFile);
  cmd->add_option("--predictions", o.predictions, "external predictions for supertag pruning")
      ->check(CLI::ExistingFile);
  cmd->add_option("--exceptions", o.exceptions, "exception list (one lexical type per line)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--max-edges", o.max_edges, "edge budget per sentence");
}

void add_parse(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("parse", "Parse a corpus; writes one JSON line per sentence");
  auto o = std::make_shared<ParseOpts>();
  auto corpus = std::make_shared<std::string>();
  add_parse_options(cmd, *o);
  cmd->add_option("--mode", o->mode, "none or supertag (default: supertag when a tag source is given)")
      ->check(CLI::IsMember({"none", "supertag"}));
  cmd->add_option("corpus", *corpus, "corpus to parse")->required()->check(CLI::ExistingFile);
  cmd->callback([=, &g] {
    auto grammar = Grammar::load(o->grammar);
    auto c = load_token_corpus(*corpus);
    auto src = tag_source(o->model, o->predictions);
    auto mode = o->mode.empty() ? (src ? "supertag" : "none") : o->mode;
    PruneConfig prune;
    if (mode == "none" && (src || !o->exceptions.empty()))
      warn("--mode none ignores the tag source and exception list");
    if (mode == "supertag") {
      if (!src) throw Error("--mode supertag needs --model or --predictions");
      prune = PruneConfig::supertag(src, o->exceptions.empty() ? std::set<std::string>{} : load_exceptions(o->exceptions));
    }
    Output out(g.out);
    std::size_t parsed = 0;
    for (const auto& s : c.sentences) {
      auto sp = parse_sentence(grammar, s, prune, Budget{o->max_edges});
      parsed += sp.status == ParseStatus::parsed;
      out.stream() << to_json(sp).dump() << '\n';
    }
    std::cerr << parsed << " of " << c.sentences.size() << " sentences parsed\n";
  });
}

void add_eval_parse(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("eval-parse", "EDM precision/recall/F1, exact match and coverage");
  auto gold = std::make_shared<std::string>();
  auto parses = std::make_shared<std::string>();
  cmd->add_option("gold", *gold, "gold corpus with triples")->required()->check(CLI::ExistingFile);
  cmd->add_option("parses", *parses, "parse output (JSON lines)")->required()->check(CLI::ExistingFile);
  cmd->callback([=, &g] {
    auto c = load_token_corpus(*gold);
    std::ifstream in(*parses);
    auto results = read_parses(in);
    Output out(g.out);
    print_report(out.stream(), eval_parses(c, results));
  });
}

void add_bench(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("bench", "Speed/accuracy of unpruned vs supertag-pruned parsing; CSV output");
  auto o = std::make_shared<ParseOpts>();
  auto corpora = std::make_shared<std::vector<std::string>>();
  auto reps = std::make_shared<int>(1);
  add_parse_options(cmd, *o);
  cmd->add_option("corpora", *corpora, "corpora to parse")->required()->check(CLI::ExistingFile);
  cmd->add_option("--repetitions", *reps, "timing repetitions (median is reported)");
  cmd->callback([=, &g] {
    auto grammar = Grammar::load(o->grammar);
    auto loaded = load_corpora(*corpora);
    std::vector<const Corpus*> refs;
    for (const auto& c : loaded) refs.push_back(&c);
    std::vector<BenchSystem> systems{{"none", PruneConfig::none()}};
    if (auto src = tag_source(o->model, o->predictions)) {
      systems.push_back({"supertag", PruneConfig::supertag(src)});
      if (!o->exceptions.empty())
        systems.push_back({"supertag+exceptions", PruneConfig::supertag(src, load_exceptions(o->exceptions))});
    }
    auto rows = bench(grammar, refs, systems, Budget{o->max_edges}, *reps);
    print_bench(std::cerr, rows);
    Output out(g.out);
    write_bench_csv(out.stream(), rows);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supertagging toolkit for a unification chart parser"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--format", g.format, "corpus output format (tsv or jsonl)")
      ->check(CLI::IsMember({"tsv", "jsonl"}));
  app.add_option("--out", g.out, "output path (default: standard output)");
  app.add_flag_callback("--quiet", [] { verbose_warnings() = false; }, "suppress warnings");

  add_convert(app, g);
  add_train(app, g);
  add_tag(app, g);
  add_eval_tagger(app, g);
  add_compile_exceptions(app, g);
  add_parse(app, g);
  add_eval_parse(app, g);
  add_bench(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
