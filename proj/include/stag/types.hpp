#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stag/common.hpp"
#include "stag/feature_structure.hpp"

namespace stag {

// Finite bounded-complete partial order of types with an implicit "top",
// plus the attribute names and per-type expanded constraints of a grammar.
class TypeHierarchy {
 public:
  struct Declaration {
    std::string name;
    std::vector<std::string> parents;  // empty means top
  };

  TypeHierarchy() { names_.push_back("top"); index_["top"] = 0; parents_.emplace_back(); finish(); }

  // Throws GrammarError on unknown parents, cycles, or a pair of types with
  // more than one maximal common subtype.
  static TypeHierarchy build(const std::vector<Declaration>& decls) {
    TypeHierarchy h;
    h.names_ = {"top"};
    h.index_ = {{"top", 0}};
    h.parents_ = {{}};
    for (const auto& d : decls) {
      if (d.name == "top") throw GrammarError("type 'top' is implicit and cannot be declared");
      if (h.index_.count(d.name)) throw GrammarError("type '" + d.name + "' declared twice");
      h.index_[d.name] = static_cast<TypeId>(h.names_.size());
      h.names_.push_back(d.name);
      h.parents_.emplace_back();
    }
    for (const auto& d : decls) {
      auto& ps = h.parents_[h.index_.at(d.name)];
      if (d.parents.empty()) ps.push_back(kTop);
      for (const auto& p : d.parents) {
        auto it = h.index_.find(p);
        if (it == h.index_.end()) throw GrammarError("type '" + d.name + "' has unknown parent '" + p + "'");
        ps.push_back(it->second);
      }
    }
    h.finish();
    return h;
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(TypeId t) const { return names_.at(static_cast<std::size_t>(t)); }
  const std::vector<TypeId>& parents(TypeId t) const { return parents_.at(static_cast<std::size_t>(t)); }

  std::optional<TypeId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  TypeId id(std::string_view name) const {
    auto t = find(name);
    if (!t) throw GrammarError("unknown type '" + std::string(name) + "'");
    return *t;
  }

  // True when specific is below or equal to general.
  bool is_subtype(TypeId specific, TypeId general) const {
    return below_[static_cast<std::size_t>(specific) * size() + static_cast<std::size_t>(general)] != 0;
  }

  TypeId glb(TypeId a, TypeId b) const {
    return glb_[static_cast<std::size_t>(a) * size() + static_cast<std::size_t>(b)];
  }

  bool is_leaf(TypeId t) const { return leaf_[static_cast<std::size_t>(t)] != 0; }

  // Parents always precede children.
  const std::vector<TypeId>& topological_order() const { return topo_; }

  AttrId intern_attribute(std::string_view name) {
    auto it = attr_index_.find(std::string(name));
    if (it != attr_index_.end()) return it->second;
    auto id = static_cast<AttrId>(attr_names_.size());
    attr_names_.emplace_back(name);
    attr_index_.emplace(std::string(name), id);
    return id;
  }
  std::optional<AttrId> find_attribute(std::string_view name) const {
    auto it = attr_index_.find(std::string(name));
    if (it == attr_index_.end()) return std::nullopt;
    return it->second;
  }
  AttrId attribute(std::string_view name) const {
    auto a = find_attribute(name);
    if (!a) throw GrammarError("unknown attribute '" + std::string(name) + "'");
    return *a;
  }
  const std::string& attribute_name(AttrId a) const { return attr_names_.at(static_cast<std::size_t>(a)); }
  std::size_t attribute_count() const { return attr_names_.size(); }

  // Expanded constraint of t, or nullptr when t imposes no structure.
  const FeatureStructure* constraint(TypeId t) const {
    auto i = static_cast<std::size_t>(t);
    return i < constraints_.size() && constraints_[i] ? &*constraints_[i] : nullptr;
  }
  void set_constraint(TypeId t, FeatureStructure fs) {
    if (constraints_.size() < size()) constraints_.resize(size());
    if (fs.arcs().empty())
      constraints_[static_cast<std::size_t>(t)].reset();
    else
      constraints_[static_cast<std::size_t>(t)] = std::move(fs);
  }

 private:
  void finish() {
    const std::size_t n = size();
    // Topological order by DFS over parents; detects cycles.
    topo_.clear();
    std::vector<int> state(n, 0);
    auto visit = [&](auto&& self, TypeId t) -> void {
      auto i = static_cast<std::size_t>(t);
      if (state[i] == 2) return;
      if (state[i] == 1) throw GrammarError("type hierarchy has a cycle through '" + names_[i] + "'");
      state[i] = 1;
      for (auto p : parents_[i]) self(self, p);
      state[i] = 2;
      topo_.push_back(t);
    };
    for (std::size_t i = 0; i < n; ++i) visit(visit, static_cast<TypeId>(i));

    below_.assign(n * n, 0);
    for (auto t : topo_) {
      auto i = static_cast<std::size_t>(t);
      below_[i * n + i] = 1;
      for (auto p : parents_[i])
        for (std::size_t g = 0; g < n; ++g)
          if (below_[static_cast<std::size_t>(p) * n + g]) below_[i * n + g] = 1;
    }
    leaf_.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i)
      for (auto p : parents_[i]) leaf_[static_cast<std::size_t>(p)] = 0;

    glb_.assign(n * n, kBottom);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        std::vector<std::size_t> common;
        for (std::size_t c = 0; c < n; ++c)
          if (below_[c * n + a] && below_[c * n + b]) common.push_back(c);
        std::vector<std::size_t> maximal;
        for (auto c : common) {
          bool dominated = false;
          for (auto d : common)
            if (d != c && below_[c * n + d]) dominated = true;
          if (!dominated) maximal.push_back(c);
        }
        if (maximal.size() > 1)
          throw GrammarError("types '" + names_[a] + "' and '" + names_[b] +
                             "' have no unique greatest lower bound (candidates '" + names_[maximal[0]] + "' and '" +
                             names_[maximal[1]] + "')");
        TypeId g = maximal.empty() ? kBottom : static_cast<TypeId>(maximal[0]);
        glb_[a * n + b] = glb_[b * n + a] = g;
      }
    }
    constraints_.assign(n, std::nullopt);
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, TypeId> index_;
  std::vector<std::vector<TypeId>> parents_;
  std::vector<TypeId> topo_;
  std::vector<char> below_;
  std::vector<char> leaf_;
  std::vector<TypeId> glb_;
  std::vector<std::string> attr_names_;
  std::unordered_map<std::string, AttrId> attr_index_;
  std::vector<std::optional<FeatureStructure>> constraints_;
};

}  // namespace stag
