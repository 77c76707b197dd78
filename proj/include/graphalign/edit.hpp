// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_EDIT_HPP
#define GRAPHALIGN_EDIT_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphalign/graph.hpp"

namespace graphalign {

struct NodeSub {
  int node = 0;
  AtomLabel label;
  auto operator<=>(const NodeSub&) const = default;
};

/// Edge substitutions address the edge by its normalized endpoints.
struct EdgeSub {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  auto operator<=>(const EdgeSub&) const = default;
};

/// A homogeneous set of label substitutions: either node subs or edge
/// subs, never both. The empty edit is size 0.
struct Edit {
  std::vector<NodeSub> node_subs;
  std::vector<EdgeSub> edge_subs;

  int size() const { return static_cast<int>(node_subs.size() + edge_subs.size()); }
  bool empty() const { return node_subs.empty() && edge_subs.empty(); }

  auto operator<=>(const Edit&) const = default;

  std::string str() const {
    if (empty()) return "{}";
    std::string s = "{";
    for (const NodeSub& ns : node_subs) {
      if (s.size() > 1) s += ' ';
      s += 'n' + std::to_string(ns.node) + "->" + ns.label.str();
    }
    for (const EdgeSub& es : edge_subs) {
      if (s.size() > 1) s += ' ';
      s += 'e' + std::to_string(es.a) + '-' + std::to_string(es.b) + "->" +
           to_string(es.order);
    }
    return s + '}';
  }
};

/// The constraint map: which substitutions are allowed and out of which
/// alphabets. Alphabets are kept sorted so "alphabet index" ordering in
/// enumeration is well defined.
struct EditBudget {
  int max_node_subs = 2;
  int max_edge_subs = 1;
  std::vector<AtomLabel> atom_alphabet;
  std::vector<BondOrder> bond_alphabet;

  void normalize() {
    std::sort(atom_alphabet.begin(), atom_alphabet.end());
    atom_alphabet.erase(std::unique(atom_alphabet.begin(), atom_alphabet.end()),
                        atom_alphabet.end());
    std::sort(bond_alphabet.begin(), bond_alphabet.end());
    bond_alphabet.erase(std::unique(bond_alphabet.begin(), bond_alphabet.end()),
                        bond_alphabet.end());
  }

  std::optional<std::string> validate() const {
    if (max_node_subs < 0 || max_edge_subs < 0) return "negative substitution cap";
    if (max_node_subs > 0 && atom_alphabet.empty())
      return "node substitutions allowed but atom alphabet is empty";
    if (max_edge_subs > 0 && bond_alphabet.empty())
      return "edge substitutions allowed but bond alphabet is empty";
    return std::nullopt;
  }
};

inline EditBudget make_budget(int max_node_subs, int max_edge_subs,
                              std::vector<AtomLabel> atoms,
                              std::vector<BondOrder> bonds) {
  EditBudget b{max_node_subs, max_edge_subs, std::move(atoms), std::move(bonds)};
  b.normalize();
  return b;
}

/// Applies the substitutions; topology and coordinates are untouched.
/// Throws on an unknown target or a substitution that would not change
/// the current label.
inline PlanarEmbedding apply_edit(const Edit& e, const PlanarEmbedding& v) {
  PlanarEmbedding out = v;
  for (const NodeSub& ns : e.node_subs) {
    if (ns.node < 0 || ns.node >= out.graph.node_count())
      throw std::invalid_argument("edit targets unknown node " + std::to_string(ns.node));
    if (out.graph.atoms[ns.node] == ns.label)
      throw std::invalid_argument("no-op node substitution on node " +
                                  std::to_string(ns.node));
    out.graph.atoms[ns.node] = ns.label;
  }
  for (const EdgeSub& es : e.edge_subs) {
    Edge probe(es.a, es.b, es.order);
    auto it = std::find_if(out.graph.edges.begin(), out.graph.edges.end(),
                           [&](const Edge& g) { return g.a == probe.a && g.b == probe.b; });
    if (it == out.graph.edges.end())
      throw std::invalid_argument("edit targets unknown edge " + std::to_string(es.a) +
                                  "-" + std::to_string(es.b));
    if (it->order == es.order)
      throw std::invalid_argument("no-op edge substitution on edge " +
                                  std::to_string(es.a) + "-" + std::to_string(es.b));
    it->order = es.order;
  }
  return out;
}

namespace detail {

// Lexicographic generation of all homogeneous edits of exactly the given
// size: node edits first, then edge edits, targets ascending, alternative
// labels in alphabet order.
template <typename Fn>
bool for_each_edit_of_size(const MolGraph& g, const EditBudget& budget, int size, Fn&& fn) {
  if (size == 0) return fn(Edit{});

  if (size <= budget.max_node_subs) {
    const int n = g.node_count();
    std::vector<int> targets;
    Edit current;
    auto rec = [&](auto&& self, int from) -> bool {
      if (static_cast<int>(current.node_subs.size()) == size) return fn(current);
      for (int i = from; i <= n - (size - static_cast<int>(current.node_subs.size())); ++i) {
        for (const AtomLabel& alt : budget.atom_alphabet) {
          if (alt == g.atoms[i]) continue;
          current.node_subs.push_back({i, alt});
          if (!self(self, i + 1)) return false;
          current.node_subs.pop_back();
        }
      }
      return true;
    };
    if (n >= size && !rec(rec, 0)) return false;
  }

  if (size <= budget.max_edge_subs) {
    std::vector<Edge> edges = g.edges;
    std::sort(edges.begin(), edges.end());
    const int m = static_cast<int>(edges.size());
    Edit current;
    auto rec = [&](auto&& self, int from) -> bool {
      if (static_cast<int>(current.edge_subs.size()) == size) return fn(current);
      for (int i = from; i <= m - (size - static_cast<int>(current.edge_subs.size())); ++i) {
        for (BondOrder alt : budget.bond_alphabet) {
          if (alt == edges[i].order) continue;
          current.edge_subs.push_back({edges[i].a, edges[i].b, alt});
          if (!self(self, i + 1)) return false;
          current.edge_subs.pop_back();
        }
      }
      return true;
    };
    if (m >= size && !rec(rec, 0)) return false;
  }
  return true;
}

}  // namespace detail

/// Streams E(v): every edit the budget allows, in non-decreasing size
/// order starting with the empty edit. Deterministic order within a size
/// (node edits before edge edits, lexicographic by targets then alphabet
/// index).
class EditEnumerator {
 public:
  EditEnumerator(const PlanarEmbedding& v, const EditBudget& budget)
      : graph_(&v.graph), budget_(budget) {
    if (auto err = budget.validate()) throw std::invalid_argument(*err);
  }

  std::optional<Edit> next() {
    while (cursor_ >= buffer_.size()) {
      if (next_size_ > std::max(budget_.max_node_subs, budget_.max_edge_subs))
        return std::nullopt;
      buffer_.clear();
      cursor_ = 0;
      detail::for_each_edit_of_size(*graph_, budget_, next_size_, [&](const Edit& e) {
        buffer_.push_back(e);
        return true;
      });
      ++next_size_;
    }
    return buffer_[cursor_++];
  }

  std::vector<Edit> drain() {
    std::vector<Edit> all;
    while (auto e = next()) all.push_back(std::move(*e));
    return all;
  }

 private:
  const MolGraph* graph_;
  EditBudget budget_;
  int next_size_ = 0;
  std::vector<Edit> buffer_;
  std::size_t cursor_ = 0;
};

}  // namespace graphalign

#endif
