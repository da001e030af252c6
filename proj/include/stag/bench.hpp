#pragma once

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "stag/metrics.hpp"
#include "stag/parser.hpp"

namespace stag {

struct BenchSystem {
  std::string name;
  PruneConfig prune;
};

struct BenchRow {
  std::string dataset;
  std::string system;
  double sec_per_sen = 0;  // parsing only, median over repetitions
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double exact_match = 0;
  double coverage = 0;
  double tagging_sec_per_sen = 0;  // reported apart from parsing
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Runs the tag source over the corpus once, returning its predictions and the
// tagging time per sentence.
inline std::pair<std::shared_ptr<ExternalPredictions>, double> precompute_predictions(const TagSource& src,
                                                                                      const Corpus& c) {
  auto out = std::make_shared<ExternalPredictions>();
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& s : c.sentences) {
    auto tags = src.tags_for(s);
    auto& v = out->by_sentence[s.id];
    for (std::size_t i = 0; i < tags.size(); ++i) v.push_back({s.tokens[i].span, tags[i], 1.0});
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {out, c.sentences.empty() ? 0.0 : secs / static_cast<double>(c.sentences.size())};
}

inline std::vector<BenchRow> bench(const Grammar& g, const std::vector<const Corpus*>& corpora,
                                   const std::vector<BenchSystem>& systems, const Budget& budget = {},
                                   int repetitions = 1) {
  if (repetitions < 1) throw Error("repetitions must be positive");
  std::set<std::string> names;
  for (const auto& s : systems)
    if (!names.insert(s.name).second) throw Error("duplicate system name '" + s.name + "'");

  std::vector<BenchRow> rows;
  for (const auto* corpus : corpora) {
    for (const auto& sys : systems) {
      BenchRow row{corpus->name, sys.name};
      PruneConfig prune = sys.prune;
      if (prune.mode == PruneMode::supertag) {
        if (!prune.predictions) throw Error("system '" + sys.name + "' has no predictions");
        auto [pre, tag_time] = precompute_predictions(*prune.predictions, *corpus);
        prune.predictions = pre;
        row.tagging_sec_per_sen = tag_time;
      }
      std::vector<double> times;
      std::vector<SentenceParse> parses;
      for (int rep = 0; rep < repetitions; ++rep) {
        auto result = parse_corpus(g, *corpus, prune, budget);
        double t = 0;
        for (const auto& p : result) t += p.stats.wall_time;
        times.push_back(corpus->sentences.empty() ? 0.0 : t / static_cast<double>(corpus->sentences.size()));
        if (rep == 0) parses = std::move(result);
      }
      auto report = eval_parses(*corpus, parses);
      row.sec_per_sen = median(times);
      row.precision = report.edm.precision();
      row.recall = report.edm.recall();
      row.f1 = report.edm.f1();
      row.exact_match = report.exact_match;
      row.coverage = report.coverage;
      rows.push_back(row);
    }
  }
  // Unweighted mean over datasets per system.
  std::vector<BenchRow> averages;
  for (const auto& sys : systems) {
    BenchRow avg{"all average", sys.name};
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.system != sys.name) continue;
      ++n;
      avg.sec_per_sen += r.sec_per_sen;
      avg.precision += r.precision;
      avg.recall += r.recall;
      avg.f1 += r.f1;
      avg.exact_match += r.exact_match;
      avg.coverage += r.coverage;
      avg.tagging_sec_per_sen += r.tagging_sec_per_sen;
    }
    if (n == 0) continue;
    for (double* f : {&avg.sec_per_sen, &avg.precision, &avg.recall, &avg.f1, &avg.exact_match, &avg.coverage,
                      &avg.tagging_sec_per_sen})
      *f /= static_cast<double>(n);
    averages.push_back(avg);
  }
  rows.insert(rows.end(), averages.begin(), averages.end());
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "dataset,system,sec_per_sen,precision,recall,f1,exact_match,coverage\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.system << ',' << std::setprecision(6) << r.sec_per_sen << ',' << fixed2(r.precision)
        << ',' << fixed2(r.recall) << ',' << fixed2(r.f1) << ',' << fixed2(r.exact_match) << ','
        << fixed2(r.coverage) << '\n';
  }
}

inline void print_bench(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << std::left << std::setw(16) << "dataset" << std::setw(20) << "system" << std::right << std::setw(12)
      << "sec/sen" << std::setw(12) << "tag s/sen" << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8)
      << "F1" << std::setw(8) << "exact" << std::setw(8) << "cov" << '\n';
  for (const auto& r : rows)
    out << std::left << std::setw(16) << r.dataset << std::setw(20) << r.system << std::right << std::setw(12)
        << std::setprecision(4) << r.sec_per_sen << std::setw(12) << r.tagging_sec_per_sen << std::setw(8)
        << fixed2(r.precision) << std::setw(8) << fixed2(r.recall) << std::setw(8) << fixed2(r.f1) << std::setw(8)
        << fixed2(r.exact_match) << std::setw(8) << fixed2(r.coverage) << '\n';
}

}  // namespace stag
