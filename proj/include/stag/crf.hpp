#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stag/linear.hpp"

namespace stag {

// Linear-chain CRF over sparse token features.
// score(y) = start[y0] + sum_i emit(i, y_i) + sum_i trans[y_{i-1}][y_i] + end[y_last]
struct CrfModel {
  std::vector<std::string> tags;
  WeightMatrix emission;    // features x tags
  WeightMatrix transition;  // previous tag x next tag
  std::vector<double> start;
  std::vector<double> end;
  Interner vocab;
  TemplateConfig templ;
  std::vector<double> objective_trace;

  CrfModel() = default;
  CrfModel(std::vector<std::string> tag_list, std::size_t features)
      : tags(std::move(tag_list)),
        emission(features, tags.size()),
        transition(tags.size(), tags.size()),
        start(tags.size(), 0.0),
        end(tags.size(), 0.0) {}

  std::size_t num_tags() const { return tags.size(); }
};

// Same shape as the model's parameters.
struct CrfGradient {
  WeightMatrix emission;
  WeightMatrix transition;
  std::vector<double> start;
  std::vector<double> end;

  explicit CrfGradient(const CrfModel& m)
      : emission(m.emission.rows(), m.num_tags()),
        transition(m.num_tags(), m.num_tags()),
        start(m.num_tags(), 0.0),
        end(m.num_tags(), 0.0) {}
};

namespace detail {

inline double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

// Row-major n x K emission scores; `scale` multiplies the emission weights.
inline std::vector<double> emission_scores(const CrfModel& m, std::span<const FeatureVector> xs,
                                           double scale = 1.0) {
  const std::size_t K = m.num_tags();
  std::vector<double> e(xs.size() * K, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (auto f : xs[i].ids) {
      const double* w = m.emission.row(f);
      for (std::size_t k = 0; k < K; ++k) e[i * K + k] += scale * w[k];
    }
  return e;
}

struct Lattice {
  std::size_t n = 0, K = 0;
  std::vector<double> emit, alpha, beta;
  double log_z = 0;

  double marginal(std::size_t i, std::size_t y) const {
    return std::exp(alpha[i * K + y] + beta[i * K + y] - log_z);
  }
};

inline Lattice forward_backward(const CrfModel& m, std::vector<double> emit) {
  Lattice L;
  L.K = m.num_tags();
  L.n = L.K ? emit.size() / L.K : 0;
  L.emit = std::move(emit);
  const std::size_t n = L.n, K = L.K;
  L.alpha.assign(n * K, 0.0);
  L.beta.assign(n * K, 0.0);
  if (n == 0) return L;
  std::vector<double> buf(K);
  for (std::size_t y = 0; y < K; ++y) L.alpha[y] = m.start[y] + L.emit[y];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t y = 0; y < K; ++y) {
      for (std::size_t p = 0; p < K; ++p) buf[p] = L.alpha[(i - 1) * K + p] + m.transition.at(p, y);
      L.alpha[i * K + y] = L.emit[i * K + y] + log_sum_exp(buf.data(), K);
    }
  for (std::size_t y = 0; y < K; ++y) L.beta[(n - 1) * K + y] = m.end[y];
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t y = 0; y < K; ++y) {
      for (std::size_t nx = 0; nx < K; ++nx)
        buf[nx] = m.transition.at(y, nx) + L.emit[(i + 1) * K + nx] + L.beta[(i + 1) * K + nx];
      L.beta[i * K + y] = log_sum_exp(buf.data(), K);
    }
  for (std::size_t y = 0; y < K; ++y) buf[y] = L.alpha[(n - 1) * K + y] + m.end[y];
  L.log_z = log_sum_exp(buf.data(), K);
  return L;
}

}  // namespace detail

inline double sequence_score(const CrfModel& m, std::span<const FeatureVector> xs,
                             std::span<const std::size_t> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("sequence_score: length mismatch");
  if (xs.empty()) return 0;
  auto e = detail::emission_scores(m, xs);
  const std::size_t K = m.num_tags();
  double s = m.start[ys[0]];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += m.transition.at(ys[i - 1], ys[i]);
    s += e[i * K + ys[i]];
  }
  return s + m.end[ys.back()];
}

inline double log_partition(const CrfModel& m, std::span<const FeatureVector> xs) {
  if (xs.empty()) return 0;
  return detail::forward_backward(m, detail::emission_scores(m, xs)).log_z;
}

// Negative log-likelihood of ys; adds d(nll)/d(theta) into grad when given.
inline double crf_nll(const CrfModel& m, std::span<const FeatureVector> xs,
                      std::span<const std::size_t> ys, CrfGradient* grad = nullptr) {
  if (xs.size() != ys.size()) throw std::invalid_argument("crf_nll: length mismatch");
  if (xs.empty()) return 0;
  const std::size_t n = xs.size(), K = m.num_tags();
  auto L = detail::forward_backward(m, detail::emission_scores(m, xs));
  double gold = m.start[ys[0]] + m.end[ys[n - 1]];
  for (std::size_t i = 0; i < n; ++i) {
    gold += L.emit[i * K + ys[i]];
    if (i > 0) gold += m.transition.at(ys[i - 1], ys[i]);
  }
  if (grad) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t y = 0; y < K; ++y) {
        double d = L.marginal(i, y) - (ys[i] == y ? 1.0 : 0.0);
        for (auto f : xs[i].ids) grad->emission.at(f, y) += d;
        if (i == 0) grad->start[y] += d;
        if (i == n - 1) grad->end[y] += d;
      }
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t p = 0; p < K; ++p)
        for (std::size_t y = 0; y < K; ++y)
          grad->transition.at(p, y) += std::exp(L.alpha[(i - 1) * K + p] + m.transition.at(p, y) +
                                                L.emit[i * K + y] + L.beta[i * K + y] - L.log_z);
      grad->transition.at(ys[i - 1], ys[i]) -= 1.0;
    }
  }
  return L.log_z - gold;
}

struct ViterbiPath {
  std::vector<std::size_t> tags;
  double score = 0;
};

// Maximum-scoring sequence; among equal scores the lexicographically smallest
// tag-index sequence wins. Decodes forward over backward max-suffix scores so
// the earliest position decides first.
inline ViterbiPath viterbi(const CrfModel& m, std::span<const FeatureVector> xs) {
  ViterbiPath out;
  const std::size_t n = xs.size(), K = m.num_tags();
  if (n == 0 || K == 0) return out;
  auto e = detail::emission_scores(m, xs);
  std::vector<double> best_suffix(n * K);
  for (std::size_t y = 0; y < K; ++y) best_suffix[(n - 1) * K + y] = m.end[y];
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t y = 0; y < K; ++y) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t nx = 0; nx < K; ++nx)
        mx = std::max(mx, m.transition.at(y, nx) + e[(i + 1) * K + nx] + best_suffix[(i + 1) * K + nx]);
      best_suffix[i * K + y] = mx;
    }
  auto pick = [&](std::size_t i, auto&& prefix) {
    std::size_t best = 0;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < K; ++y) {
      double v = prefix(y) + e[i * K + y] + best_suffix[i * K + y];
      if (v > mx) {
        mx = v;
        best = y;
      }
    }
    return best;
  };
  out.tags.push_back(pick(0, [&](std::size_t y) { return m.start[y]; }));
  for (std::size_t i = 1; i < n; ++i) {
    auto prev = out.tags.back();
    out.tags.push_back(pick(i, [&](std::size_t y) { return m.transition.at(prev, y); }));
  }
  out.score = sequence_score(m, xs, out.tags);
  return out;
}

inline std::vector<FeatureVector> featurize(const CrfModel& m, const Sentence& s) {
  std::vector<FeatureVector> xs;
  xs.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) xs.push_back(extract_features(s, i, std::nullopt, m.templ, m.vocab));
  return xs;
}

struct SequencePrediction {
  std::vector<TagPrediction> tags;  // per-token score is the posterior marginal
  double score = 0;                 // sequence score of the returned path
};

inline SequencePrediction viterbi(const CrfModel& m, const Sentence& s, const TemplateConfig& templ) {
  if (templ.autoregressive) throw std::invalid_argument("viterbi: CRF templates are not autoregressive");
  if (templ.use_pos != m.templ.use_pos) throw std::invalid_argument("viterbi: template does not match the model");
  auto xs = featurize(m, s);
  auto path = viterbi(m, xs);
  SequencePrediction out;
  out.score = path.score;
  if (xs.empty()) return out;
  auto L = detail::forward_backward(m, detail::emission_scores(m, xs));
  for (std::size_t i = 0; i < path.tags.size(); ++i)
    out.tags.push_back({m.tags[path.tags[i]], L.marginal(i, path.tags[i])});
  return out;
}

inline SequencePrediction viterbi(const CrfModel& m, const Sentence& s) { return viterbi(m, s, m.templ); }

struct CrfTrainOptions {
  double l2_strength = 1.0;
  int epochs = 30;
  std::uint64_t seed = 0;
  double learning_rate = 0.05;
  int patience = 5;  // epochs without dev improvement before stopping
};

// Per-sentence SGD on  sum_s nll(s) + l2/2 ||theta||^2  with forward-backward
// gradients. With a dev corpus, keeps the best-dev-accuracy parameters and stops
// after `patience` epochs without improvement.
inline CrfModel train_crf(const Corpus& train, const TemplateConfig& templ, const CrfTrainOptions& opt,
                          const Corpus* dev = nullptr) {
  if (templ.autoregressive)
    throw std::invalid_argument("train_crf: the chain model does not take previous-tag features");
  if (train.token_count() == 0) throw Error("train_crf: empty training corpus");
  auto tags = tag_inventory(train);
  auto vocab = build_vocabulary(train, templ);
  CrfModel m(tags, vocab.size());
  m.vocab = std::move(vocab);
  m.templ = templ;
  const std::size_t K = m.num_tags();

  struct Item {
    std::vector<FeatureVector> xs;
    std::vector<std::size_t> ys;
    const std::string* id;
  };
  std::vector<Item> data;
  for (const auto& s : train.sentences) {
    if (s.size() == 0) continue;
    Item it{featurize(m, s), {}, &s.id};
    for (const auto& t : gold_tags(s)) it.ys.push_back(detail::tag_index(m.tags, t));
    data.push_back(std::move(it));
  }
  if (K == 1) return m;

  auto dev_accuracy = [&](const CrfModel& model) {
    std::size_t ok = 0, total = 0;
    for (const auto& s : dev->sentences) {
      auto pred = viterbi(model, s);
      auto gold = gold_tags(s);
      for (std::size_t i = 0; i < gold.size(); ++i) ok += pred.tags[i].tag == gold[i];
      total += gold.size();
    }
    return total ? static_cast<double>(ok) / total : 0.0;
  };

  const double reg = opt.l2_strength / static_cast<double>(data.size());
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::optional<CrfModel> best;
  double best_acc = -1;
  int stale = 0;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const double eta = opt.learning_rate / std::sqrt(1.0 + epoch);
    detail::shuffle(order, rng);
    double scale = 1.0, total_nll = 0;
    for (auto idx : order) {
      const auto& it = data[idx];
      const std::size_t n = it.xs.size();
      auto L = detail::forward_backward(m, detail::emission_scores(m, it.xs, scale));
      double gold = m.start[it.ys[0]] + m.end[it.ys[n - 1]];
      for (std::size_t i = 0; i < n; ++i) {
        gold += L.emit[i * K + it.ys[i]];
        if (i > 0) gold += m.transition.at(it.ys[i - 1], it.ys[i]);
      }
      double nll = L.log_z - gold;
      if (!std::isfinite(nll)) {
        std::ostringstream msg;
        msg << "train_crf: non-finite loss at epoch " << epoch << " on sentence '" << *it.id
            << "' (log Z = " << L.log_z << ", gold score = " << gold << ", step = " << eta << ")";
        throw Error(msg.str());
      }
      total_nll += nll;

      // Transition gradient needs the pre-update parameters.
      WeightMatrix dtrans(K, K);
      for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t p = 0; p < K; ++p)
          for (std::size_t y = 0; y < K; ++y)
            dtrans.at(p, y) += std::exp(L.alpha[(i - 1) * K + p] + m.transition.at(p, y) +
                                        L.emit[i * K + y] + L.beta[i * K + y] - L.log_z);
        dtrans.at(it.ys[i - 1], it.ys[i]) -= 1.0;
      }
      std::vector<double> dstart(K), dend(K);
      scale *= (1.0 - eta * reg);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t y = 0; y < K; ++y) {
          double d = L.marginal(i, y) - (it.ys[i] == y ? 1.0 : 0.0);
          if (i == 0) dstart[y] = d;
          if (i == n - 1) dend[y] = d;
          for (auto f : it.xs[i].ids) m.emission.at(f, y) -= eta * d / scale;
        }
      for (std::size_t p = 0; p < K; ++p) {
        m.start[p] -= eta * (dstart[p] + reg * m.start[p]);
        m.end[p] -= eta * (dend[p] + reg * m.end[p]);
        for (std::size_t y = 0; y < K; ++y)
          m.transition.at(p, y) -= eta * (dtrans.at(p, y) + reg * m.transition.at(p, y));
      }
      if (scale < 1e-6) {
        for (double& v : m.emission.data()) v *= scale;
        scale = 1.0;
      }
    }
    for (double& v : m.emission.data()) v *= scale;
    double sq = 0;
    for (double v : m.emission.data()) sq += v * v;
    for (double v : m.transition.data()) sq += v * v;
    for (std::size_t k = 0; k < K; ++k) sq += m.start[k] * m.start[k] + m.end[k] * m.end[k];
    m.objective_trace.push_back(total_nll + 0.5 * opt.l2_strength * sq);

    if (dev && !dev->sentences.empty()) {
      double acc = dev_accuracy(m);
      if (acc > best_acc) {
        best_acc = acc;
        best = m;
        stale = 0;
      } else if (++stale >= opt.patience) {
        break;
      }
    }
  }
  if (best) {
    auto trace = m.objective_trace;
    m = std::move(*best);
    m.objective_trace = std::move(trace);
  }
  return m;
}

}  // namespace stag
