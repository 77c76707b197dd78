// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_ALIGN_HPP
#define GRAPHALIGN_ALIGN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphalign/edit.hpp"
#include "graphalign/graph.hpp"
#include "graphalign/isomorphism.hpp"
#include "graphalign/rng.hpp"

namespace graphalign {

/// Result of the minimal correcting-edit search: no solution, a unique
/// minimal edit, or a tie set of equal-size edits (enumeration order).
struct AlignmentOutcome {
  enum class Kind { NoSolution, Unique, Ties };
  Kind kind = Kind::NoSolution;
  std::vector<Edit> edits;
  long explored = 0;  // candidates that reached an isomorphism test

  bool no_solution() const { return kind == Kind::NoSolution; }
  const Edit& unique() const { return edits.front(); }
};

namespace detail {

// Shared state for one search: the prediction's graph, the true graph,
// and a memo of isomorphism verdicts keyed by canonical form so repeated
// isomorphic candidates (symmetric molecules) are tested once.
struct SearchContext {
  const MolGraph* g = nullptr;
  const MolGraph* w = nullptr;
  long explored = 0;
  std::map<std::string, bool> verdicts;

  bool correcting(const MolGraph& candidate) {
    ++explored;
    std::string key = canonical_key(candidate).bytes;
    auto it = verdicts.find(key);
    if (it != verdicts.end()) return it->second;
    bool ok = is_isomorphic(candidate, *w);
    verdicts.emplace(std::move(key), ok);
    return ok;
  }
};

// All correcting node-substitution edits of exactly `size`, pruned by the
// atom-histogram delta: a candidate branch dies as soon as the remaining
// substitutions cannot close the histogram gap (each substitution moves
// the L1 distance by at most 2).
inline void node_edits_at_size(SearchContext& ctx, const EditBudget& budget, int size,
                               std::vector<Edit>& out) {
  const MolGraph& g = *ctx.g;
  const int n = g.node_count();
  if (n < size) return;

  // Label ids over alphabet + both graphs' labels.
  std::vector<AtomLabel> labels = budget.atom_alphabet;
  labels.insert(labels.end(), g.atoms.begin(), g.atoms.end());
  labels.insert(labels.end(), ctx.w->atoms.begin(), ctx.w->atoms.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto id_of = [&](const AtomLabel& a) {
    return static_cast<int>(std::lower_bound(labels.begin(), labels.end(), a) -
                            labels.begin());
  };

  std::vector<int> delta(labels.size(), 0);  // hist(w) - hist(current)
  for (const AtomLabel& a : ctx.w->atoms) ++delta[id_of(a)];
  for (const AtomLabel& a : g.atoms) --delta[id_of(a)];
  int l1 = 0;
  for (int d : delta) l1 += d < 0 ? -d : d;
  if (l1 > 2 * size) return;

  std::vector<int> node_label(n);
  for (int i = 0; i < n; ++i) node_label[i] = id_of(g.atoms[i]);
  std::vector<int> alphabet_ids(budget.atom_alphabet.size());
  for (std::size_t k = 0; k < budget.atom_alphabet.size(); ++k)
    alphabet_ids[k] = id_of(budget.atom_alphabet[k]);

  MolGraph scratch = g;
  Edit current;
  auto rec = [&](auto&& self, int from, int depth) -> void {
    if (depth == size) {
      if (ctx.correcting(scratch)) out.push_back(current);
      return;
    }
    const int remaining = size - depth - 1;
    for (int i = from; i <= n - (size - depth); ++i) {
      const int cur = node_label[i];
      for (std::size_t k = 0; k < alphabet_ids.size(); ++k) {
        const int alt = alphabet_ids[k];
        if (alt == cur) continue;
        // step is the exact L1 change: each of the two touched buckets
        // moves by one, toward or away from zero.
        const int step = (delta[cur] < 0 ? -1 : 1) + (delta[alt] > 0 ? -1 : 1);
        if (l1 + step > 2 * remaining) continue;
        delta[cur] += 1;
        delta[alt] -= 1;
        l1 += step;
        current.node_subs.push_back({i, budget.atom_alphabet[k]});
        scratch.atoms[i] = budget.atom_alphabet[k];
        self(self, i + 1, depth + 1);
        scratch.atoms[i] = g.atoms[i];
        current.node_subs.pop_back();
        l1 -= step;
        delta[cur] -= 1;
        delta[alt] += 1;
      }
    }
  };
  rec(rec, 0, 0);
}

// Same idea for edge substitutions over the bond-order histogram.
inline void edge_edits_at_size(SearchContext& ctx, const EditBudget& budget, int size,
                               std::vector<Edit>& out) {
  const MolGraph& g = *ctx.g;
  std::vector<Edge> edges = g.edges;
  std::sort(edges.begin(), edges.end());
  const int m = static_cast<int>(edges.size());
  if (m < size) return;

  constexpr int kOrders = 4;  // index by BondOrder value 1..3
  int delta[kOrders] = {0, 0, 0, 0};
  for (const Edge& e : ctx.w->edges) ++delta[static_cast<int>(e.order)];
  for (const Edge& e : edges) --delta[static_cast<int>(e.order)];
  int l1 = 0;
  for (int d : delta) l1 += d < 0 ? -d : d;
  if (l1 > 2 * size) return;

  MolGraph scratch = g;
  // scratch.edges parallels the sorted edge list so substitutions can be
  // written in place.
  scratch.edges = edges;
  Edit current;
  auto rec = [&](auto&& self, int from, int depth) -> void {
    if (depth == size) {
      if (ctx.correcting(scratch)) out.push_back(current);
      return;
    }
    const int remaining = size - depth - 1;
    for (int i = from; i <= m - (size - depth); ++i) {
      const int cur = static_cast<int>(edges[i].order);
      for (BondOrder alt_order : budget.bond_alphabet) {
        const int alt = static_cast<int>(alt_order);
        if (alt == cur) continue;
        const int step = (delta[cur] < 0 ? -1 : 1) + (delta[alt] > 0 ? -1 : 1);
        if (l1 + step > 2 * remaining) continue;
        delta[cur] += 1;
        delta[alt] -= 1;
        l1 += step;
        current.edge_subs.push_back({edges[i].a, edges[i].b, alt_order});
        scratch.edges[i].order = alt_order;
        self(self, i + 1, depth + 1);
        scratch.edges[i].order = edges[i].order;
        current.edge_subs.pop_back();
        l1 -= step;
        delta[cur] -= 1;
        delta[alt] += 1;
      }
    }
  };
  rec(rec, 0, 0);
}

}  // namespace detail

/// argmin over E(v̂) of |e| such that project(e × v̂) ≅ w. Searches in
/// size order and stops at the first size that yields solutions, so every
/// returned edit is minimal. Substitutions cannot change node or edge
/// counts, and node (edge) substitutions cannot move the bond (atom)
/// histogram, so mismatches there end the search early.
inline AlignmentOutcome correcting_edit_search(const PlanarEmbedding& vhat,
                                               const MolGraph& w,
                                               const EditBudget& budget) {
  if (auto err = budget.validate()) throw std::invalid_argument(*err);
  const MolGraph& g = vhat.graph;

  AlignmentOutcome outcome;
  if (g.node_count() != w.node_count() || g.edge_count() != w.edge_count())
    return outcome;

  auto [atoms_g, bonds_g] = label_histogram(g);
  auto [atoms_w, bonds_w] = label_histogram(w);
  const bool atoms_match = atoms_g == atoms_w;
  const bool bonds_match = bonds_g == bonds_w;

  detail::SearchContext ctx;
  ctx.g = &g;
  ctx.w = &w;

  const int max_size = std::max(budget.max_node_subs, budget.max_edge_subs);
  for (int size = 0; size <= max_size; ++size) {
    std::vector<Edit> found;
    if (size == 0) {
      if (atoms_match && bonds_match && ctx.correcting(g)) found.push_back(Edit{});
    } else {
      // Node subs preserve the bond histogram; edge subs preserve the
      // atom histogram. A route whose fixed histogram already disagrees
      // can never produce a correcting edit.
      if (size <= budget.max_node_subs && bonds_match)
        detail::node_edits_at_size(ctx, budget, size, found);
      if (size <= budget.max_edge_subs && atoms_match)
        detail::edge_edits_at_size(ctx, budget, size, found);
    }
    if (!found.empty()) {
      outcome.kind = found.size() == 1 ? AlignmentOutcome::Kind::Unique
                                       : AlignmentOutcome::Kind::Ties;
      outcome.edits = std::move(found);
      break;
    }
  }
  outcome.explored = ctx.explored;
  return outcome;
}

enum class TiePolicyKind { Discard, MaxLikelihood, UniformRandom, LikelihoodWeighted };

struct TiePolicy {
  TiePolicyKind kind = TiePolicyKind::Discard;
  std::uint64_t seed = 0;
};

inline std::optional<TiePolicyKind> tie_policy_from_string(const std::string& s) {
  if (s == "discard") return TiePolicyKind::Discard;
  if (s == "max_likelihood") return TiePolicyKind::MaxLikelihood;
  if (s == "uniform_random") return TiePolicyKind::UniformRandom;
  if (s == "likelihood_weighted") return TiePolicyKind::LikelihoodWeighted;
  return std::nullopt;
}

inline const char* to_string(TiePolicyKind k) {
  switch (k) {
    case TiePolicyKind::Discard: return "discard";
    case TiePolicyKind::MaxLikelihood: return "max_likelihood";
    case TiePolicyKind::UniformRandom: return "uniform_random";
    case TiePolicyKind::LikelihoodWeighted: return "likelihood_weighted";
  }
  return "?";
}

inline bool policy_needs_scores(TiePolicyKind k) {
  return k == TiePolicyKind::MaxLikelihood || k == TiePolicyKind::LikelihoodWeighted;
}

namespace detail {

// Tie resolution over precomputed scores (nullptr when the policy does
// not use them). Returns the index of the winning tie member, or nullopt
// for discard. Random draws depend only on the policy seed.
inline std::optional<std::size_t> resolve_tie_index(std::size_t n_ties,
                                                    const TiePolicy& policy,
                                                    const std::vector<double>* scores) {
  switch (policy.kind) {
    case TiePolicyKind::Discard:
      return std::nullopt;
    case TiePolicyKind::MaxLikelihood: {
      if (!scores) throw std::invalid_argument("max_likelihood policy requires a scorer");
      std::size_t best = 0;
      for (std::size_t i = 1; i < n_ties; ++i)
        if ((*scores)[i] > (*scores)[best]) best = i;
      return best;
    }
    case TiePolicyKind::UniformRandom: {
      std::mt19937_64 rng(policy.seed);
      return static_cast<std::size_t>(draw_below(rng, n_ties));
    }
    case TiePolicyKind::LikelihoodWeighted: {
      if (!scores)
        throw std::invalid_argument("likelihood_weighted policy requires a scorer");
      std::vector<double> weights(*scores);
      double max_score = *std::max_element(weights.begin(), weights.end());
      double total = 0.0;
      for (double& s : weights) {
        s = std::exp(s - max_score);
        total += s;
      }
      std::mt19937_64 rng(policy.seed);
      double u = draw_unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
      }
      return weights.size() - 1;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Log-likelihood of a candidate rich label under the predictor.
using Scorer = std::function<double(const PlanarEmbedding&)>;

/// Resolves an outcome to at most one edit. A unique solution is taken
/// regardless of policy; ties are discarded, scored, or drawn at random
/// per the policy.
inline std::optional<Edit> choose(const AlignmentOutcome& outcome,
                                  const PlanarEmbedding& vhat, const TiePolicy& policy,
                                  const Scorer& scorer = {}) {
  if (outcome.kind == AlignmentOutcome::Kind::NoSolution) return std::nullopt;
  if (outcome.kind == AlignmentOutcome::Kind::Unique) return outcome.unique();

  const std::vector<Edit>& ties = outcome.edits;
  std::vector<double> scores;
  const std::vector<double>* score_ptr = nullptr;
  if (policy_needs_scores(policy.kind)) {
    if (!scorer)
      throw std::invalid_argument(std::string(to_string(policy.kind)) +
                                  " policy requires a scorer");
    scores.reserve(ties.size());
    for (const Edit& e : ties) scores.push_back(scorer(apply_edit(e, vhat)));
    score_ptr = &scores;
  }
  auto idx = detail::resolve_tie_index(ties.size(), policy, score_ptr);
  if (!idx) return std::nullopt;
  return ties[*idx];
}

}  // namespace graphalign

#endif
