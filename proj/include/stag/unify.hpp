#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stag/feature_structure.hpp"
#include "stag/types.hpp"

namespace stag {

using Path = std::vector<AttrId>;

// Destructive union-find unification over a scratch space. Structures are
// copied in with add(); results are read back with materialize(). A failed
// unify() leaves the space unusable until reset().
class Unifier {
 public:
  using ConstraintLookup = std::function<const FeatureStructure*(TypeId)>;

  explicit Unifier(const TypeHierarchy& h) : h_(&h) {}
  Unifier(const TypeHierarchy& h, ConstraintLookup lookup) : h_(&h), lookup_(std::move(lookup)) {}

  void reset() {
    parent_.clear();
    type_.clear();
    head_.clear();
    pool_.clear();
  }

  std::size_t node_count() const { return parent_.size(); }

  // Copies fs into the space; returns the node holding its root.
  std::uint32_t add(const FeatureStructure& fs) {
    auto base = static_cast<std::uint32_t>(parent_.size());
    for (std::uint32_t n = 0; n < fs.size(); ++n) {
      parent_.push_back(base + n);
      type_.push_back(fs.type(n));
      std::int32_t head = -1;
      auto arcs = fs.arcs(n);
      for (auto it = arcs.rbegin(); it != arcs.rend(); ++it) {
        pool_.push_back({it->attr, base + it->target, head});
        head = static_cast<std::int32_t>(pool_.size() - 1);
      }
      head_.push_back(head);
    }
    return base;
  }

  std::uint32_t find(std::uint32_t n) {
    auto root = n;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[n] != root) {
      auto next = parent_[n];
      parent_[n] = root;
      n = next;
    }
    return root;
  }

  TypeId type(std::uint32_t n) { return type_[find(n)]; }

  std::optional<std::uint32_t> follow(std::uint32_t n, AttrId attr) {
    for (auto i = head_[find(n)]; i >= 0; i = pool_[static_cast<std::size_t>(i)].next)
      if (pool_[static_cast<std::size_t>(i)].attr == attr) return pool_[static_cast<std::size_t>(i)].target;
    return std::nullopt;
  }

  bool unify(std::uint32_t a, std::uint32_t b) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> work{{a, b}};
    while (!work.empty()) {
      auto [x, y] = work.back();
      work.pop_back();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      TypeId tx = type_[x], ty = type_[y];
      TypeId t = h_->glb(tx, ty);
      if (t == kBottom) return false;
      parent_[y] = x;
      type_[x] = t;
      // Move y's arcs onto x, queueing shared attributes.
      auto i = head_[y];
      head_[y] = -1;
      while (i >= 0) {
        auto& arc = pool_[static_cast<std::size_t>(i)];
        auto next = arc.next;
        std::int32_t match = -1;
        for (auto j = head_[x]; j >= 0; j = pool_[static_cast<std::size_t>(j)].next)
          if (pool_[static_cast<std::size_t>(j)].attr == arc.attr) {
            match = j;
            break;
          }
        if (match >= 0) {
          work.emplace_back(pool_[static_cast<std::size_t>(match)].target, arc.target);
        } else {
          arc.next = head_[x];
          head_[x] = i;
        }
        i = next;
      }
      if (t != tx && t != ty) {
        if (const auto* c = constraint(t)) {
          auto cn = add(*c);
          work.emplace_back(x, cn);
        }
      }
    }
    return true;
  }

  // Canonical copy of the structure under n; nullopt if unification made it cyclic.
  std::optional<FeatureStructure> materialize(std::uint32_t n) {
    FsGraph g;
    std::map<std::uint32_t, std::uint32_t> local;
    std::vector<std::uint32_t> stack;
    auto node_of = [&](std::uint32_t rep) {
      auto [it, fresh] = local.emplace(rep, 0);
      if (fresh) {
        it->second = g.add_node(type_[rep]);
        stack.push_back(rep);
      }
      return it->second;
    };
    auto root = node_of(find(n));
    while (!stack.empty()) {
      auto rep = stack.back();
      stack.pop_back();
      auto me = local.at(rep);
      for (auto i = head_[rep]; i >= 0; i = pool_[static_cast<std::size_t>(i)].next) {
        auto target = node_of(find(pool_[static_cast<std::size_t>(i)].target));
        g.arcs[me].push_back({pool_[static_cast<std::size_t>(i)].attr, target});
      }
    }
    return FeatureStructure::from_graph(g, root);
  }

 private:
  struct PoolArc {
    AttrId attr;
    std::uint32_t target;
    std::int32_t next;
  };

  const FeatureStructure* constraint(TypeId t) const { return lookup_ ? lookup_(t) : h_->constraint(t); }

  const TypeHierarchy* h_;
  ConstraintLookup lookup_;
  std::vector<std::uint32_t> parent_;
  std::vector<TypeId> type_;
  std::vector<std::int32_t> head_;
  std::vector<PoolArc> pool_;
};

// Most general structure subsumed by both; nullopt on a type clash or cycle.
inline std::optional<FeatureStructure> unify(const TypeHierarchy& h, const FeatureStructure& a,
                                             const FeatureStructure& b) {
  Unifier u(h);
  auto ra = u.add(a);
  auto rb = u.add(b);
  if (!u.unify(ra, rb)) return std::nullopt;
  return u.materialize(ra);
}

// True when a is at least as general as b: every path and path equality of a
// holds in b, with b's types at or below a's.
inline bool subsumes(const TypeHierarchy& h, const FeatureStructure& a, const FeatureStructure& b) {
  std::vector<std::int64_t> image(a.size(), -1);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [na, nb] = stack.back();
    stack.pop_back();
    if (image[na] >= 0) {
      if (image[na] != nb) return false;
      continue;
    }
    image[na] = nb;
    if (!h.is_subtype(b.type(nb), a.type(na))) return false;
    for (const auto& arc : a.arcs(na)) {
      auto tb = b.follow(nb, arc.attr);
      if (!tb) return false;
      stack.emplace_back(arc.target, *tb);
    }
  }
  return true;
}

inline Path parse_path(TypeHierarchy& h, std::string_view text) {
  Path p;
  if (util::trim(text).empty()) return p;
  for (const auto& part : util::split(util::trim(text), '.')) {
    if (part.empty()) throw GrammarError("empty attribute in path '" + std::string(text) + "'");
    p.push_back(h.intern_attribute(part));
  }
  return p;
}

inline std::string path_to_string(const TypeHierarchy& h, const Path& p) {
  std::string out;
  for (auto a : p) {
    if (!out.empty()) out += '.';
    out += h.attribute_name(a);
  }
  return out;
}

// Builds a structure from path descriptions. Every typed node is unified with
// its type's constraint when expand is set.
class FsBuilder {
 public:
  explicit FsBuilder(const TypeHierarchy& h, TypeId root_type = kTop) : h_(&h) { g_.add_node(root_type); }

  FsBuilder& type(const Path& p, TypeId t) {
    auto n = node(p);
    auto merged = h_->glb(g_.types[n], t);
    if (merged == kBottom)
      throw GrammarError("conflicting types '" + h_->name(g_.types[n]) + "' and '" + h_->name(t) + "' at " +
                         path_to_string(*h_, p));
    g_.types[n] = merged;
    return *this;
  }

  FsBuilder& share(const Path& a, const Path& b) {
    node(a);
    node(b);
    shared_.emplace_back(a, b);
    return *this;
  }

  FsBuilder& tag(const Path& p, const std::string& name) {
    auto [it, fresh] = tags_.emplace(name, p);
    if (fresh)
      node(p);
    else
      share(it->second, p);
    return *this;
  }

  // Nullopt when the descriptions are inconsistent.
  std::optional<FeatureStructure> build(bool expand = true,
                                        Unifier::ConstraintLookup lookup = nullptr) const {
    Unifier u = lookup ? Unifier(*h_, lookup) : Unifier(*h_);
    auto tree = *FeatureStructure::from_graph(g_, 0);
    auto root = u.add(tree);
    for (const auto& [a, b] : shared_) {
      auto na = path_node(u, root, a), nb = path_node(u, root, b);
      if (!u.unify(na, nb)) return std::nullopt;
    }
    if (expand) {
      auto get = [&](TypeId t) { return lookup ? lookup(t) : h_->constraint(t); };
      for (std::uint32_t n = 0; n < tree.size(); ++n) {
        auto t = u.type(root + n);
        if (const auto* c = get(t)) {
          if (!u.unify(root + n, u.add(*c))) return std::nullopt;
        }
      }
    }
    return u.materialize(root);
  }

 private:
  std::uint32_t node(const Path& p) {
    std::uint32_t n = 0;
    for (auto attr : p) {
      std::optional<std::uint32_t> next;
      for (const auto& a : g_.arcs[n])
        if (a.attr == attr) next = a.target;
      if (!next) {
        auto m = g_.add_node(kTop);
        g_.arcs[n].push_back({attr, m});
        next = m;
      }
      n = *next;
    }
    return n;
  }

  static std::uint32_t path_node(Unifier& u, std::uint32_t root, const Path& p) {
    auto n = root;
    for (auto attr : p) n = *u.follow(n, attr);
    return n;
  }

  const TypeHierarchy* h_;
  FsGraph g_;
  std::vector<std::pair<Path, Path>> shared_;
  std::map<std::string, Path> tags_;
};

// Attribute-value matrix rendering; shared nodes carry #n tags.
inline std::string to_string(const TypeHierarchy& h, const FeatureStructure& fs) {
  std::vector<int> indegree(fs.size(), 0);
  for (std::uint32_t n = 0; n < fs.size(); ++n)
    for (const auto& a : fs.arcs(n)) ++indegree[a.target];
  std::vector<int> tag(fs.size(), 0);
  int next_tag = 1;
  std::vector<char> printed(fs.size(), 0);
  std::ostringstream out;
  auto print = [&](auto&& self, std::uint32_t n) -> void {
    if (indegree[n] > 1) {
      if (!tag[n]) tag[n] = next_tag++;
      out << '#' << tag[n];
      if (printed[n]) return;
      out << ' ';
    }
    printed[n] = 1;
    auto arcs = fs.arcs(n);
    if (arcs.empty()) {
      out << h.name(fs.type(n));
      return;
    }
    out << '[' << h.name(fs.type(n));
    for (const auto& a : arcs) {
      out << ' ' << h.attribute_name(a.attr) << ' ';
      self(self, a.target);
    }
    out << ']';
  };
  print(print, 0);
  return out.str();
}

}  // namespace stag
