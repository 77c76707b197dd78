// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_METRICS_HPP
#define GRAPHALIGN_METRICS_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "graphalign/graph.hpp"
#include "graphalign/isomorphism.hpp"

namespace graphalign {

using GraphPair = std::pair<MolGraph, MolGraph>;  // (predicted, true)

struct TypeAccuracy {
  int n_containing = 0;
  int n_correct = 0;
  double fraction() const {
    return n_containing == 0 ? 0.0 : static_cast<double>(n_correct) / n_containing;
  }
};

/// Per-type rows keyed by label string; a type absent from every true
/// graph simply has no row.
struct EvalResult {
  double graph_accuracy = 0.0;
  std::map<std::string, TypeAccuracy> per_atom_type;
  std::map<std::string, TypeAccuracy> per_bond_type;
};

/// Fraction of pairs whose predicted graph is isomorphic to the truth.
inline double graph_accuracy(const std::vector<GraphPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("graph_accuracy of an empty list");
  int correct = 0;
  for (const auto& [pred, truth] : pairs)
    if (is_isomorphic(pred, truth)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

namespace detail {

inline bool contains_atom(const MolGraph& g, const AtomLabel& type) {
  for (const AtomLabel& a : g.atoms)
    if (a == type) return true;
  return false;
}

inline bool contains_bond(const MolGraph& g, BondOrder type) {
  for (const Edge& e : g.edges)
    if (e.order == type) return true;
  return false;
}

}  // namespace detail

/// Among pairs whose TRUE graph contains the type, the fraction whose
/// prediction is fully correct. nullopt when the type never occurs.
inline std::optional<double> per_type_accuracy(const std::vector<GraphPair>& pairs,
                                               const AtomLabel& type) {
  TypeAccuracy acc;
  for (const auto& [pred, truth] : pairs) {
    if (!detail::contains_atom(truth, type)) continue;
    ++acc.n_containing;
    if (is_isomorphic(pred, truth)) ++acc.n_correct;
  }
  if (acc.n_containing == 0) return std::nullopt;
  return acc.fraction();
}

inline std::optional<double> per_type_accuracy(const std::vector<GraphPair>& pairs,
                                               BondOrder type) {
  TypeAccuracy acc;
  for (const auto& [pred, truth] : pairs) {
    if (!detail::contains_bond(truth, type)) continue;
    ++acc.n_containing;
    if (is_isomorphic(pred, truth)) ++acc.n_correct;
  }
  if (acc.n_containing == 0) return std::nullopt;
  return acc.fraction();
}

/// Full evaluation: one isomorphism verdict per pair, aggregated overall
/// and per atom/bond type present in the truths.
inline EvalResult evaluate(const std::vector<GraphPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("evaluate of an empty list");
  EvalResult result;
  int correct = 0;
  for (const auto& [pred, truth] : pairs) {
    const bool ok = is_isomorphic(pred, truth);
    if (ok) ++correct;
    std::map<std::string, char> atom_types;
    for (const AtomLabel& a : truth.atoms) atom_types[a.str()] = 1;
    for (const auto& [t, _] : atom_types) {
      TypeAccuracy& row = result.per_atom_type[t];
      ++row.n_containing;
      if (ok) ++row.n_correct;
    }
    std::map<std::string, char> bond_types;
    for (const Edge& e : truth.edges) bond_types[to_string(e.order)] = 1;
    for (const auto& [t, _] : bond_types) {
      TypeAccuracy& row = result.per_bond_type[t];
      ++row.n_containing;
      if (ok) ++row.n_correct;
    }
  }
  result.graph_accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  return result;
}

}  // namespace graphalign

#endif
