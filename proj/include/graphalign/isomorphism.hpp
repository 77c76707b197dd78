// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_ISOMORPHISM_HPP
#define GRAPHALIGN_ISOMORPHISM_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphalign/graph.hpp"

namespace graphalign {

namespace detail {

using OrderedAdj = std::vector<std::vector<std::pair<int, BondOrder>>>;

inline OrderedAdj ordered_adjacency(const MolGraph& g) {
  OrderedAdj adj(g.atoms.size());
  for (const Edge& e : g.edges) {
    adj[e.a].emplace_back(e.b, e.order);
    adj[e.b].emplace_back(e.a, e.order);
  }
  return adj;
}

// One round of label refinement. Signatures pair the current color with
// the sorted (bond order, neighbor color) multiset; new colors are the
// ranks of the sorted unique signatures, so they are canonical for the
// signature set they were computed over.
using Signature = std::pair<int, std::vector<std::pair<int, int>>>;

inline std::vector<Signature> round_signatures(const OrderedAdj& adj,
                                               const std::vector<int>& colors) {
  std::vector<Signature> sigs(adj.size());
  for (std::size_t v = 0; v < adj.size(); ++v) {
    std::vector<std::pair<int, int>> nb;
    nb.reserve(adj[v].size());
    for (auto [u, o] : adj[v]) nb.emplace_back(static_cast<int>(o), colors[u]);
    std::sort(nb.begin(), nb.end());
    sigs[v] = {colors[v], std::move(nb)};
  }
  return sigs;
}

// Refines to a stable partition. Colors are rank-encoded each round.
inline void refine_colors(const OrderedAdj& adj, std::vector<int>& colors) {
  while (true) {
    auto sigs = round_signatures(adj, colors);
    std::vector<Signature> uniq = sigs;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<int> next(colors.size());
    for (std::size_t v = 0; v < sigs.size(); ++v)
      next[v] = static_cast<int>(
          std::lower_bound(uniq.begin(), uniq.end(), sigs[v]) - uniq.begin());
    if (next == colors) return;
    colors = std::move(next);
  }
}

inline std::vector<int> initial_colors(const MolGraph& g,
                                       const std::vector<AtomLabel>& palette) {
  std::vector<int> colors(g.atoms.size());
  for (std::size_t v = 0; v < g.atoms.size(); ++v)
    colors[v] = static_cast<int>(
        std::lower_bound(palette.begin(), palette.end(), g.atoms[v]) -
        palette.begin());
  return colors;
}

inline std::vector<int> color_counts(const std::vector<int>& colors) {
  int k = 0;
  for (int c : colors) k = std::max(k, c + 1);
  std::vector<int> counts(k, 0);
  for (int c : colors) ++counts[c];
  return counts;
}

}  // namespace detail

/// Exact labeled-graph isomorphism: a node bijection preserving atom
/// labels (charge included) and mapping edges onto edges of equal bond
/// order. Quick-rejects on counts and histograms, refines a joint color
/// partition, then backtracks over color-compatible assignments.
inline bool is_isomorphic(const MolGraph& g1, const MolGraph& g2) {
  const int n = g1.node_count();
  if (n != g2.node_count() || g1.edge_count() != g2.edge_count()) return false;
  if (label_histogram(g1) != label_histogram(g2)) return false;
  if (n == 0) return true;
  if (n == 1) return true;  // histograms already matched

  // Joint palette so equal colors mean equal labels across both graphs.
  std::vector<AtomLabel> palette = g1.atoms;
  palette.insert(palette.end(), g2.atoms.begin(), g2.atoms.end());
  std::sort(palette.begin(), palette.end());
  palette.erase(std::unique(palette.begin(), palette.end()), palette.end());

  auto adj1 = detail::ordered_adjacency(g1);
  auto adj2 = detail::ordered_adjacency(g2);
  std::vector<int> c1 = detail::initial_colors(g1, palette);
  std::vector<int> c2 = detail::initial_colors(g2, palette);

  // Refine jointly: signatures from both graphs share one rank space per
  // round, otherwise colors would not be comparable between the graphs.
  while (true) {
    auto s1 = detail::round_signatures(adj1, c1);
    auto s2 = detail::round_signatures(adj2, c2);
    std::vector<detail::Signature> uniq;
    uniq.reserve(s1.size() + s2.size());
    uniq.insert(uniq.end(), s1.begin(), s1.end());
    uniq.insert(uniq.end(), s2.begin(), s2.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto rank = [&](const detail::Signature& s) {
      return static_cast<int>(
          std::lower_bound(uniq.begin(), uniq.end(), s) - uniq.begin());
    };
    std::vector<int> n1(s1.size()), n2(s2.size());
    for (std::size_t v = 0; v < s1.size(); ++v) n1[v] = rank(s1[v]);
    for (std::size_t v = 0; v < s2.size(); ++v) n2[v] = rank(s2[v]);
    bool stable = (n1 == c1 && n2 == c2);
    c1 = std::move(n1);
    c2 = std::move(n2);
    if (detail::color_counts(c1) != detail::color_counts(c2)) return false;
    if (stable) break;
  }

  // Bond-order lookup for g2.
  std::vector<std::int8_t> mat(static_cast<std::size_t>(n) * n, 0);
  for (const Edge& e : g2.edges) {
    mat[static_cast<std::size_t>(e.a) * n + e.b] = static_cast<std::int8_t>(e.order);
    mat[static_cast<std::size_t>(e.b) * n + e.a] = static_cast<std::int8_t>(e.order);
  }

  auto counts = detail::color_counts(c1);

  // Static vertex order: rarest color first, then keep the frontier
  // connected so edge constraints bite early.
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> placed(n, 0);
  std::vector<int> mapped_nbrs(n, 0);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (placed[v]) continue;
      if (best == -1) { best = v; continue; }
      auto key = [&](int x) {
        return std::make_tuple(-mapped_nbrs[x], counts[c1[x]],
                               -static_cast<int>(adj1[x].size()), x);
      };
      if (key(v) < key(best)) best = v;
    }
    placed[best] = 1;
    order.push_back(best);
    for (auto [u, o] : adj1[best]) { (void)o; ++mapped_nbrs[u]; }
  }

  std::vector<int> g1_to_g2(n, -1);
  std::vector<char> used(n, 0);

  auto backtrack = [&](auto&& self, int depth) -> bool {
    if (depth == n) return true;
    int u = order[depth];
    for (int v = 0; v < n; ++v) {
      if (used[v] || c2[v] != c1[u]) continue;
      bool ok = true;
      for (auto [w, o] : adj1[u]) {
        int mv = g1_to_g2[w];
        if (mv >= 0 &&
            mat[static_cast<std::size_t>(mv) * n + v] != static_cast<std::int8_t>(o)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      g1_to_g2[u] = v;
      used[v] = 1;
      if (self(self, depth + 1)) return true;
      g1_to_g2[u] = -1;
      used[v] = 0;
    }
    return false;
  };
  return backtrack(backtrack, 0);
}

/// Opaque canonical form: equal bytes iff the graphs are isomorphic.
struct CanonicalKey {
  std::string bytes;
  auto operator<=>(const CanonicalKey&) const = default;
};

namespace detail {

inline std::string certificate(const MolGraph& g, const std::vector<int>& colors) {
  const int n = g.node_count();
  std::vector<int> pos(n);
  for (int v = 0; v < n; ++v) pos[colors[v]] = v;
  std::vector<int> inv(n);
  for (int v = 0; v < n; ++v) inv[v] = colors[v];
  std::string out;
  out.reserve(16 + g.atoms.size() * 6 + g.edges.size() * 9);
  out += std::to_string(n);
  out += ',';
  out += std::to_string(g.edge_count());
  out += '|';
  for (int k = 0; k < n; ++k) {
    const AtomLabel& a = g.atoms[pos[k]];
    out += std::to_string(a.token.size());
    out += ':';
    out += a.token;
    out += '/';
    out += std::to_string(a.charge);
    out += ';';
  }
  std::vector<std::tuple<int, int, int>> edges;
  edges.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    int x = inv[e.a], y = inv[e.b];
    if (x > y) std::swap(x, y);
    edges.emplace_back(x, y, static_cast<int>(e.order));
  }
  std::sort(edges.begin(), edges.end());
  for (auto [x, y, o] : edges) {
    out += std::to_string(x);
    out += '-';
    out += std::to_string(y);
    out += ':';
    out += std::to_string(o);
    out += ';';
  }
  return out;
}

// Canonical labeling by refinement with individualization on ties: the
// first non-singleton cell is split on each of its members in turn and
// the lexicographically smallest certificate wins.
inline std::string canonical_search(const MolGraph& g, const OrderedAdj& adj,
                                    std::vector<int> colors) {
  refine_colors(adj, colors);
  const int n = g.node_count();
  auto counts = color_counts(colors);
  int split = -1;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 1) {
      split = static_cast<int>(c);
      break;
    }
  }
  if (split < 0) return certificate(g, colors);

  std::string best;
  for (int v = 0; v < n; ++v) {
    if (colors[v] != split) continue;
    std::vector<int> branched(colors.size());
    for (int u = 0; u < n; ++u) branched[u] = colors[u] * 2 + (u == v ? 0 : 1);
    std::string cert = canonical_search(g, adj, std::move(branched));
    if (best.empty() || cert < best) best = std::move(cert);
  }
  return best;
}

}  // namespace detail

inline CanonicalKey canonical_key(const MolGraph& g) {
  if (g.atoms.empty()) return {"0,0|"};
  std::vector<AtomLabel> palette = g.atoms;
  std::sort(palette.begin(), palette.end());
  palette.erase(std::unique(palette.begin(), palette.end()), palette.end());
  auto adj = detail::ordered_adjacency(g);
  return {detail::canonical_search(g, adj, detail::initial_colors(g, palette))};
}

}  // namespace graphalign

#endif
