#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "stag/features.hpp"

namespace stag {

enum class Loss { logistic, squared_hinge };
enum class Scheme { ovr, multinomial };
enum class Regularization { l1, l2 };

inline const char* to_string(Loss l) { return l == Loss::logistic ? "logistic" : "squared_hinge"; }
inline const char* to_string(Scheme s) { return s == Scheme::ovr ? "ovr" : "multinomial"; }
inline const char* to_string(Regularization r) { return r == Regularization::l1 ? "l1" : "l2"; }

inline Loss parse_loss(std::string_view s) {
  if (s == "logistic") return Loss::logistic;
  if (s == "squared_hinge") return Loss::squared_hinge;
  throw Error("unknown loss '" + std::string(s) + "'");
}
inline Scheme parse_scheme(std::string_view s) {
  if (s == "ovr") return Scheme::ovr;
  if (s == "multinomial") return Scheme::multinomial;
  throw Error("unknown scheme '" + std::string(s) + "'");
}
inline Regularization parse_regularization(std::string_view s) {
  if (s == "l1") return Regularization::l1;
  if (s == "l2") return Regularization::l2;
  throw Error("unknown regularization '" + std::string(s) + "'");
}

// reg_strength is the inverse regularization constant C: the objective is
//   mean loss + R(w) / (C * N),  R = ||w||_1 or ||w||^2 / 2.
struct TrainConfig {
  Loss loss = Loss::logistic;
  Scheme scheme = Scheme::ovr;
  Regularization reg = Regularization::l1;
  double reg_strength = 1.0;
  int max_iter = 100;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  bool autoregressive = false;

  // Logistic regression, one-versus-rest, L1.
  static TrainConfig maxent() { return {}; }

  // Linear SVM: L2-regularized squared hinge, C=1, one-versus-rest, 1000 iterations.
  static TrainConfig svm() {
    TrainConfig c;
    c.loss = Loss::squared_hinge;
    c.scheme = Scheme::ovr;
    c.reg = Regularization::l2;
    c.reg_strength = 1.0;
    c.max_iter = 1000;
    return c;
  }

  void validate() const {
    if (loss == Loss::squared_hinge && scheme != Scheme::ovr)
      throw std::invalid_argument("squared hinge loss requires the one-versus-rest scheme");
    if (!(reg_strength > 0)) throw std::invalid_argument("reg_strength must be positive");
    if (max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  }
};

// Dense feature-major matrix: row per feature, column per tag.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TagPrediction {
  std::string tag;
  double score = 0;
  friend bool operator==(const TagPrediction&, const TagPrediction&) = default;
};

struct LinearModel {
  std::vector<std::string> tags;  // sorted; index order is the tie-break order
  WeightMatrix weights;           // vocab.size() x tags.size()
  std::vector<double> bias;
  Interner vocab;
  TrainConfig config;
  TemplateConfig templ;
  std::vector<double> objective_trace;  // full objective after each accepted epoch

  std::vector<double> decision_scores(const FeatureVector& fv) const {
    std::vector<double> s(bias);
    for (auto f : fv.ids) {
      const double* w = weights.row(f);
      for (std::size_t k = 0; k < s.size(); ++k) s[k] += w[k];
    }
    return s;
  }
};

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(-m)), stable.
inline double log1p_exp_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

inline void softmax_inplace(std::vector<double>& s) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : s) mx = std::max(mx, v);
  double z = 0;
  for (double& v : s) z += (v = std::exp(v - mx));
  for (double& v : s) v /= z;
}

inline std::size_t argmax(const std::vector<double>& s) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  return best;
}

// Fisher-Yates with a fixed engine so shuffles do not depend on the standard library.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

struct Example {
  FeatureVector x;
  std::size_t y;
};

inline std::size_t tag_index(const std::vector<std::string>& tags, const std::string& t) {
  auto it = std::lower_bound(tags.begin(), tags.end(), t);
  if (it == tags.end() || *it != t) return tags.size();
  return static_cast<std::size_t>(it - tags.begin());
}

inline std::vector<Example> make_examples(const Corpus& train, const std::vector<std::string>& tags,
                                          const TemplateConfig& templ, const Interner& vocab) {
  std::vector<Example> ex;
  for (const auto& s : train.sentences) {
    auto gold = gold_tags(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::optional<PrevTags> prev;
      if (templ.autoregressive) prev = prev_tags_at(gold, i);
      ex.push_back({extract_features(s, i, prev, templ, vocab), tag_index(tags, gold[i])});
    }
  }
  return ex;
}

// Loss derivative with respect to each tag score; returns the example loss.
inline double loss_gradient(const TrainConfig& cfg, const std::vector<double>& s, std::size_t y,
                            std::vector<double>& g) {
  const std::size_t k_count = s.size();
  double loss = 0;
  if (cfg.scheme == Scheme::multinomial) {
    g = s;
    softmax_inplace(g);
    loss = -std::log(std::max(g[y], std::numeric_limits<double>::min()));
    g[y] -= 1.0;
    return loss;
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    double yk = (k == y) ? 1.0 : -1.0;
    double m = yk * s[k];
    if (cfg.loss == Loss::logistic) {
      loss += log1p_exp_neg(m);
      g[k] = -yk * sigmoid(-m);
    } else {
      double h = 1.0 - m;
      if (h > 0) {
        loss += h * h;
        g[k] = -2.0 * yk * h;
      } else {
        g[k] = 0;
      }
    }
  }
  return loss;
}

inline double regularizer(const TrainConfig& cfg, const WeightMatrix& w) {
  double r = 0;
  if (cfg.reg == Regularization::l1)
    for (double v : w.data()) r += std::abs(v);
  else
    for (double v : w.data()) r += 0.5 * v * v;
  return r;
}

inline double objective(const LinearModel& m, const std::vector<Example>& ex, double lambda) {
  std::vector<double> g(m.tags.size());
  double total = 0;
  for (const auto& e : ex) total += loss_gradient(m.config, m.decision_scores(e.x), e.y, g);
  return total / static_cast<double>(ex.size()) + lambda * regularizer(m.config, m.weights);
}

}  // namespace detail

// Epoch-wise SGD over shuffled tokens with inverse-scaling step size
// eta0 / sqrt(1 + epoch). L2 uses a lazily applied global scale, L1 the
// cumulative-penalty clipping of Tsuruoka et al. An epoch that raises the full
// objective is rolled back and the base step halved, so the trace never increases.
inline LinearModel train_linear(const Corpus& train, const TrainConfig& config,
                                const TemplateConfig& templ) {
  config.validate();
  if (config.autoregressive != templ.autoregressive)
    throw std::invalid_argument("train_linear: autoregressive flag differs between config and template");
  if (train.token_count() == 0) throw Error("train_linear: empty training corpus");

  LinearModel m;
  m.config = config;
  m.templ = templ;
  m.tags = tag_inventory(train);
  m.vocab = build_vocabulary(train, templ);
  const std::size_t K = m.tags.size();
  const std::size_t F = m.vocab.size();
  m.weights = WeightMatrix(F, K);
  m.bias.assign(K, 0.0);
  if (K == 1) {
    warn("train_linear: training corpus has a single tag; model is degenerate");
    return m;
  }

  const auto examples = detail::make_examples(train, m.tags, templ, m.vocab);
  const double n = static_cast<double>(examples.size());
  const double lambda = 1.0 / (config.reg_strength * n);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  // L1 cumulative penalty state.
  double u = 0;
  WeightMatrix q;
  if (config.reg == Regularization::l1) q = WeightMatrix(F, K);

  double base_lr = config.learning_rate;
  double prev_obj = detail::objective(m, examples, lambda);
  std::vector<double> scores(K), grad(K);

  for (int epoch = 0; epoch < config.max_iter; ++epoch) {
    const double eta = base_lr / std::sqrt(1.0 + epoch);
    auto saved_w = m.weights;
    auto saved_b = m.bias;
    auto saved_q = q;
    double saved_u = u;

    detail::shuffle(order, rng);
    double scale = 1.0;
    for (auto idx : order) {
      const auto& e = examples[idx];
      scores = m.bias;
      for (auto f : e.x.ids) {
        const double* w = m.weights.row(f);
        for (std::size_t k = 0; k < K; ++k) scores[k] += scale * w[k];
      }
      detail::loss_gradient(config, scores, e.y, grad);
      if (config.reg == Regularization::l2) {
        scale *= (1.0 - eta * lambda);
        if (scale < 1e-6) {
          for (double& v : m.weights.data()) v *= scale;
          scale = 1.0;
        }
      }
      for (auto f : e.x.ids) {
        double* w = m.weights.row(f);
        for (std::size_t k = 0; k < K; ++k)
          if (grad[k] != 0) w[k] -= eta * grad[k] / scale;
      }
      for (std::size_t k = 0; k < K; ++k) m.bias[k] -= eta * grad[k];
      if (config.reg == Regularization::l1) {
        u += eta * lambda;
        for (auto f : e.x.ids) {
          double* w = m.weights.row(f);
          double* qr = q.row(f);
          for (std::size_t k = 0; k < K; ++k) {
            double z = w[k];
            if (w[k] > 0)
              w[k] = std::max(0.0, w[k] - (u + qr[k]));
            else if (w[k] < 0)
              w[k] = std::min(0.0, w[k] + (u - qr[k]));
            qr[k] += w[k] - z;
          }
        }
      }
    }
    if (scale != 1.0)
      for (double& v : m.weights.data()) v *= scale;

    double obj = detail::objective(m, examples, lambda);
    if (!std::isfinite(obj)) throw Error("train_linear: objective became non-finite at epoch " +
                                         std::to_string(epoch));
    if (obj > prev_obj) {
      m.weights = std::move(saved_w);
      m.bias = std::move(saved_b);
      q = std::move(saved_q);
      u = saved_u;
      base_lr *= 0.5;
      m.objective_trace.push_back(prev_obj);
      continue;
    }
    prev_obj = obj;
    m.objective_trace.push_back(obj);
  }
  return m;
}

// Per-tag normalized scores: softmax for multinomial, normalized sigmoids for OVR logistic,
// raw decision values for squared hinge.
inline std::vector<double> normalize_scores(const LinearModel& m, std::vector<double> s) {
  if (m.config.loss == Loss::squared_hinge) return s;
  if (m.config.scheme == Scheme::multinomial) {
    detail::softmax_inplace(s);
    return s;
  }
  double z = 0;
  for (double& v : s) z += (v = detail::sigmoid(v));
  if (z > 0)
    for (double& v : s) v /= z;
  return s;
}

// Left to right; the autoregressive template sees the model's own last two labels.
inline std::vector<TagPrediction> predict_greedy(const LinearModel& m, const Sentence& s,
                                                 const TemplateConfig& templ) {
  if (templ.autoregressive != m.templ.autoregressive || templ.use_pos != m.templ.use_pos)
    throw std::invalid_argument("predict_greedy: template does not match the model");
  std::vector<TagPrediction> out;
  std::vector<std::string> so_far;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::optional<PrevTags> prev;
    if (templ.autoregressive) prev = prev_tags_at(so_far, i);
    auto fv = extract_features(s, i, prev, templ, m.vocab);
    auto raw = m.decision_scores(fv);
    auto best = detail::argmax(raw);
    out.push_back({m.tags[best], normalize_scores(m, std::move(raw))[best]});
    so_far.push_back(m.tags[best]);
  }
  return out;
}

inline std::vector<TagPrediction> predict_greedy(const LinearModel& m, const Sentence& s) {
  return predict_greedy(m, s, m.templ);
}

}  // namespace stag
