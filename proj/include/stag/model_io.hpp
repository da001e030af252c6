#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "stag/crf.hpp"
#include "stag/linear.hpp"

namespace stag {

inline constexpr int kModelFormatVersion = 1;

using TaggerModel = std::variant<LinearModel, CrfModel>;

namespace detail {

inline nlohmann::json sparse_rows(const WeightMatrix& w) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t f = 0; f < w.rows(); ++f)
    for (std::size_t k = 0; k < w.cols(); ++k)
      if (w.at(f, k) != 0.0) rows.push_back({f, k, w.at(f, k)});
  return rows;
}

inline void read_sparse_rows(const nlohmann::json& rows, WeightMatrix& w) {
  for (const auto& r : rows) {
    auto f = r.at(0).get<std::size_t>();
    auto k = r.at(1).get<std::size_t>();
    if (f >= w.rows() || k >= w.cols()) throw ModelFormatError("weight index out of range");
    w.at(f, k) = r.at(2).get<double>();
  }
}

inline nlohmann::json dense_matrix(const WeightMatrix& w) {
  nlohmann::json m = nlohmann::json::array();
  for (std::size_t r = 0; r < w.rows(); ++r)
    m.push_back(std::vector<double>(w.row(r), w.row(r) + w.cols()));
  return m;
}

inline nlohmann::json template_json(const TemplateConfig& t) {
  return {{"autoregressive", t.autoregressive}, {"use_pos", t.use_pos}, {"window", TemplateConfig::window}};
}

inline TemplateConfig template_from_json(const nlohmann::json& j) {
  TemplateConfig t;
  t.autoregressive = j.at("autoregressive").get<bool>();
  t.use_pos = j.at("use_pos").get<bool>();
  if (j.at("window").get<int>() != TemplateConfig::window) throw ModelFormatError("unsupported feature window");
  return t;
}

inline std::vector<double> sized(const nlohmann::json& j, std::size_t n, const char* what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != n) throw ModelFormatError(std::string(what) + " has the wrong length");
  return v;
}

}  // namespace detail

inline nlohmann::json model_to_json(const LinearModel& m) {
  const auto& c = m.config;
  return {{"format_version", kModelFormatVersion},
          {"model_type", "linear"},
          {"config",
           {{"loss", to_string(c.loss)},
            {"scheme", to_string(c.scheme)},
            {"reg", to_string(c.reg)},
            {"reg_strength", c.reg_strength},
            {"max_iter", c.max_iter},
            {"learning_rate", c.learning_rate},
            {"seed", c.seed},
            {"autoregressive", c.autoregressive},
            {"template", detail::template_json(m.templ)}}},
          {"tags", m.tags},
          {"vocabulary", m.vocab.strings()},
          {"weights", {{"bias", m.bias}, {"rows", detail::sparse_rows(m.weights)}}}};
}

inline nlohmann::json model_to_json(const CrfModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"model_type", "crf"},
          {"config", {{"template", detail::template_json(m.templ)}}},
          {"tags", m.tags},
          {"vocabulary", m.vocab.strings()},
          {"weights",
           {{"emission", detail::sparse_rows(m.emission)},
            {"transition", detail::dense_matrix(m.transition)},
            {"start", m.start},
            {"end", m.end}}}};
}

namespace detail {

inline void check_envelope(const nlohmann::json& j, std::string_view expected_type) {
  if (!j.is_object() || !j.contains("format_version")) throw ModelFormatError("not a model file");
  auto v = j.at("format_version").get<int>();
  if (v != kModelFormatVersion)
    throw ModelFormatError("model format version " + std::to_string(v) + " is not supported (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  auto type = j.at("model_type").get<std::string>();
  if (type != expected_type)
    throw ModelFormatError("model file holds a '" + type + "' model, expected '" + std::string(expected_type) + "'");
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model: ") + e.what());
  }
}

}  // namespace detail

inline LinearModel linear_model_from_json(const nlohmann::json& j) {
  return detail::guarded([&] {
    detail::check_envelope(j, "linear");
    LinearModel m;
    const auto& c = j.at("config");
    m.config.loss = parse_loss(c.at("loss").get<std::string>());
    m.config.scheme = parse_scheme(c.at("scheme").get<std::string>());
    m.config.reg = parse_regularization(c.at("reg").get<std::string>());
    m.config.reg_strength = c.at("reg_strength").get<double>();
    m.config.max_iter = c.at("max_iter").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.autoregressive = c.at("autoregressive").get<bool>();
    m.templ = detail::template_from_json(c.at("template"));
    m.tags = j.at("tags").get<std::vector<std::string>>();
    if (!std::is_sorted(m.tags.begin(), m.tags.end())) throw ModelFormatError("tags must be sorted");
    m.vocab = Interner::from_strings(j.at("vocabulary").get<std::vector<std::string>>());
    const auto& w = j.at("weights");
    m.bias = detail::sized(w.at("bias"), m.tags.size(), "bias");
    m.weights = WeightMatrix(m.vocab.size(), m.tags.size());
    detail::read_sparse_rows(w.at("rows"), m.weights);
    return m;
  });
}

inline CrfModel crf_model_from_json(const nlohmann::json& j) {
  return detail::guarded([&] {
    detail::check_envelope(j, "crf");
    auto tags = j.at("tags").get<std::vector<std::string>>();
    if (!std::is_sorted(tags.begin(), tags.end())) throw ModelFormatError("tags must be sorted");
    auto vocab = Interner::from_strings(j.at("vocabulary").get<std::vector<std::string>>());
    CrfModel m(tags, vocab.size());
    m.vocab = std::move(vocab);
    m.templ = detail::template_from_json(j.at("config").at("template"));
    const auto& w = j.at("weights");
    detail::read_sparse_rows(w.at("emission"), m.emission);
    const auto& tr = w.at("transition");
    if (tr.size() != m.num_tags()) throw ModelFormatError("transition has the wrong shape");
    for (std::size_t p = 0; p < m.num_tags(); ++p) {
      auto row = detail::sized(tr[p], m.num_tags(), "transition row");
      std::copy(row.begin(), row.end(), m.transition.row(p));
    }
    m.start = detail::sized(w.at("start"), m.num_tags(), "start");
    m.end = detail::sized(w.at("end"), m.num_tags(), "end");
    return m;
  });
}

namespace detail {

inline nlohmann::json read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("model file '" + path.string() + "' is truncated or not JSON: " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model '" + path.string() + "'");
  out << j.dump() << '\n';
}

}  // namespace detail

inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
  detail::write_json(path, model_to_json(m));
}
inline void save_model(const CrfModel& m, const std::filesystem::path& path) {
  detail::write_json(path, model_to_json(m));
}
inline void save_model(const TaggerModel& m, const std::filesystem::path& path) {
  std::visit([&](const auto& model) { save_model(model, path); }, m);
}

inline LinearModel load_linear_model(const std::filesystem::path& path) {
  return linear_model_from_json(detail::read_model_json(path));
}
inline CrfModel load_crf_model(const std::filesystem::path& path) {
  return crf_model_from_json(detail::read_model_json(path));
}

inline TaggerModel load_model(const std::filesystem::path& path) {
  auto j = detail::read_model_json(path);
  auto type = detail::guarded([&] { return j.at("model_type").get<std::string>(); });
  if (type == "linear") return linear_model_from_json(j);
  if (type == "crf") return crf_model_from_json(j);
  throw ModelFormatError("unknown model type '" + type + "'");
}

}  // namespace stag
