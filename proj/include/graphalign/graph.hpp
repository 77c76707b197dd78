// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_GRAPH_HPP
#define GRAPHALIGN_GRAPH_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace graphalign {

/// Node label: an element symbol, an R-group placeholder (R1, R2, ...)
/// or a superatom token such as NO2, plus a formal charge. Charge takes
/// part in equality, so C(0) and C(+1) are distinct labels.
struct AtomLabel {
  std::string token;
  int charge = 0;

  auto operator<=>(const AtomLabel&) const = default;

  std::string str() const {
    if (charge == 0) return token;
    std::string s = token;
    s += charge > 0 ? '+' : '-';
    int c = charge > 0 ? charge : -charge;
    if (c > 1) s += std::to_string(c);
    return s;
  }
};

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3 };

inline const char* to_string(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return "single";
    case BondOrder::Double: return "double";
    case BondOrder::Triple: return "triple";
  }
  return "?";
}

inline std::optional<BondOrder> bond_order_from_string(const std::string& s) {
  if (s == "single") return BondOrder::Single;
  if (s == "double") return BondOrder::Double;
  if (s == "triple") return BondOrder::Triple;
  return std::nullopt;
}

/// Undirected labeled edge; endpoints are kept normalized a < b.
struct Edge {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;

  Edge() = default;
  Edge(int u, int v, BondOrder o) : a(u < v ? u : v), b(u < v ? v : u), order(o) {}

  auto operator<=>(const Edge&) const = default;
};

/// The final (normal-label) chemical graph: heavy atoms only, no
/// coordinates. Node ids are contiguous 0..n-1.
struct MolGraph {
  std::vector<AtomLabel> atoms;
  std::vector<Edge> edges;

  int node_count() const { return static_cast<int>(atoms.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  bool operator==(const MolGraph&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// Rich label: the graph together with a 2D pixel position per node.
struct PlanarEmbedding {
  MolGraph graph;
  std::vector<Vec2> coords;  // coords[i] belongs to node i

  bool operator==(const PlanarEmbedding&) const = default;
};

using AtomHistogram = std::map<AtomLabel, int>;
using BondHistogram = std::map<BondOrder, int>;

/// Coordinate erasure; the projection from rich to normal labels.
inline const MolGraph& project(const PlanarEmbedding& v) { return v.graph; }

inline std::pair<AtomHistogram, BondHistogram> label_histogram(const MolGraph& g) {
  AtomHistogram atoms;
  for (const AtomLabel& a : g.atoms) ++atoms[a];
  BondHistogram bonds;
  for (const Edge& e : g.edges) ++bonds[e.order];
  return {std::move(atoms), std::move(bonds)};
}

inline std::vector<std::vector<int>> adjacency_lists(const MolGraph& g) {
  std::vector<std::vector<int>> adj(g.atoms.size());
  for (const Edge& e : g.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  return adj;
}

inline bool is_connected(const MolGraph& g) {
  if (g.atoms.empty()) return false;
  auto adj = adjacency_lists(g);
  std::vector<char> seen(g.atoms.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == g.atoms.size();
}

/// Structural validity check. Returns an explanation for the first
/// violated invariant, or nullopt when the graph is well formed.
inline std::optional<std::string> validate(const MolGraph& g) {
  const int n = g.node_count();
  if (n == 0) return "graph has no nodes";
  for (const AtomLabel& a : g.atoms) {
    if (a.token.empty()) return "empty atom token";
    if (a.charge < -4 || a.charge > 4) return "charge outside [-4, +4] on " + a.token;
  }
  std::map<std::pair<int, int>, int> seen;
  for (const Edge& e : g.edges) {
    if (e.a < 0 || e.b >= n) return "edge endpoint out of range";
    if (e.a == e.b) return "self-loop on node " + std::to_string(e.a);
    if (++seen[{e.a, e.b}] > 1)
      return "duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b);
  }
  if (!is_connected(g)) return "graph is not connected";
  return std::nullopt;
}

inline std::optional<std::string> validate(const PlanarEmbedding& v) {
  if (auto err = validate(v.graph)) return err;
  if (v.coords.size() != v.graph.atoms.size())
    return "coordinate count does not match node count";
  for (std::size_t i = 0; i < v.coords.size(); ++i)
    for (std::size_t j = i + 1; j < v.coords.size(); ++j)
      if (v.coords[i] == v.coords[j])
        return "nodes " + std::to_string(i) + " and " + std::to_string(j) +
               " share coordinates";
  return std::nullopt;
}

/// Relabels nodes by perm (old id i becomes perm[i]); used by tests and
/// by the canonicalizer.
inline MolGraph permute(const MolGraph& g, const std::vector<int>& perm) {
  MolGraph out;
  out.atoms.resize(g.atoms.size());
  for (std::size_t i = 0; i < g.atoms.size(); ++i) out.atoms[perm[i]] = g.atoms[i];
  out.edges.reserve(g.edges.size());
  for (const Edge& e : g.edges) out.edges.emplace_back(perm[e.a], perm[e.b], e.order);
  return out;
}

}  // namespace graphalign

#endif
