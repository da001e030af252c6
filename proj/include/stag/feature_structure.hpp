#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stag {

using TypeId = std::int32_t;
using AttrId = std::int32_t;
inline constexpr TypeId kBottom = -1;
inline constexpr TypeId kTop = 0;

struct FsArc {
  AttrId attr;
  std::uint32_t target;
  friend bool operator==(const FsArc&, const FsArc&) = default;
};

// Mutable graph form used while building structures; may hold unreachable nodes.
struct FsGraph {
  std::vector<TypeId> types;
  std::vector<std::vector<FsArc>> arcs;

  std::uint32_t add_node(TypeId t) {
    types.push_back(t);
    arcs.emplace_back();
    return static_cast<std::uint32_t>(types.size() - 1);
  }
};

// Rooted, acyclic typed feature structure in canonical form: nodes numbered in
// depth-first pre-order from the root (node 0), arcs sorted by attribute.
// Reentrancy is node sharing. Two canonical structures are isomorphic exactly
// when they compare equal.
class FeatureStructure {
 public:
  FeatureStructure() : types_{kTop}, arc_begin_{0, 0} {}

  static FeatureStructure atom(TypeId t) {
    FeatureStructure fs;
    fs.types_[0] = t;
    return fs;
  }

  // Canonicalizes the part of g reachable from root; nullopt if it has a cycle.
  static std::optional<FeatureStructure> from_graph(const FsGraph& g, std::uint32_t root) {
    FeatureStructure fs;
    fs.types_.clear();
    fs.arc_begin_.clear();
    std::vector<std::int64_t> index(g.types.size(), -1);
    std::vector<char> on_path(g.types.size(), 0);
    std::vector<std::vector<FsArc>> out_arcs;
    bool cyclic = false;
    auto visit = [&](auto&& self, std::uint32_t n) -> std::uint32_t {
      auto mine = static_cast<std::uint32_t>(fs.types_.size());
      index[n] = mine;
      on_path[n] = 1;
      fs.types_.push_back(g.types[n]);
      out_arcs.emplace_back();
      auto sorted = g.arcs[n];
      std::sort(sorted.begin(), sorted.end(), [](const FsArc& a, const FsArc& b) { return a.attr < b.attr; });
      for (const auto& a : sorted) {
        std::uint32_t t;
        if (on_path[a.target]) {
          cyclic = true;
          t = 0;
        } else if (index[a.target] >= 0) {
          t = static_cast<std::uint32_t>(index[a.target]);
        } else {
          t = self(self, a.target);
        }
        out_arcs[mine].push_back({a.attr, t});
        if (cyclic) break;
      }
      on_path[n] = 0;
      return mine;
    };
    visit(visit, root);
    if (cyclic) return std::nullopt;
    fs.arc_begin_.reserve(out_arcs.size() + 1);
    fs.arc_begin_.push_back(0);
    for (auto& v : out_arcs) {
      fs.arcs_.insert(fs.arcs_.end(), v.begin(), v.end());
      fs.arc_begin_.push_back(static_cast<std::uint32_t>(fs.arcs_.size()));
    }
    return fs;
  }

  FsGraph to_graph() const {
    FsGraph g;
    for (std::uint32_t n = 0; n < size(); ++n) {
      g.add_node(types_[n]);
      auto a = arcs(n);
      g.arcs[n].assign(a.begin(), a.end());
    }
    return g;
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(types_.size()); }
  TypeId type(std::uint32_t node = 0) const { return types_[node]; }
  std::span<const FsArc> arcs(std::uint32_t node = 0) const {
    return {arcs_.data() + arc_begin_[node], arcs_.data() + arc_begin_[node + 1]};
  }

  std::optional<std::uint32_t> follow(std::uint32_t node, AttrId attr) const {
    for (const auto& a : arcs(node))
      if (a.attr == attr) return a.target;
    return std::nullopt;
  }

  std::optional<std::uint32_t> follow_path(std::span<const AttrId> path, std::uint32_t node = 0) const {
    for (auto attr : path) {
      auto next = follow(node, attr);
      if (!next) return std::nullopt;
      node = *next;
    }
    return node;
  }

  // Copy of the substructure rooted at node.
  FeatureStructure substructure(std::uint32_t node) const {
    if (node == 0) return *this;
    return *from_graph(to_graph(), node);
  }

  friend bool operator==(const FeatureStructure&, const FeatureStructure&) = default;

 private:
  std::vector<TypeId> types_;
  std::vector<std::uint32_t> arc_begin_;
  std::vector<FsArc> arcs_;
};

}  // namespace stag
