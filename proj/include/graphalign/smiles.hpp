// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_SMILES_HPP
#define GRAPHALIGN_SMILES_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphalign/graph.hpp"
#include "graphalign/parse.hpp"

namespace graphalign {
namespace detail {

struct SmilesAtom {
  std::string token;
  int charge = 0;
  bool aromatic = false;
  int bracket_hcount = -1;  // -1: unbracketed (implicit H fills valence)
};

enum class SmilesBond : int {
  Implicit = 0,  // single, or aromatic when both ends are aromatic
  Single = 1,
  Double = 2,
  Triple = 3,
};

struct SmilesEdge {
  int a = 0;
  int b = 0;
  SmilesBond bond = SmilesBond::Implicit;
};

// Normal valence used to decide which aromatic atoms still need a double
// bond when kekulizing. Charge shifts the electron count the usual way.
inline int effective_valence(const std::string& token, int charge) {
  if (token == "C") return 4 - (charge < 0 ? -charge : charge);
  if (token == "N" || token == "P") return 3 + charge;
  if (token == "O" || token == "S") return 2 + charge;
  if (token == "B") return 3 - charge;
  return 0;  // halogens and group tokens never participate in kekulization
}

inline bool is_organic_subset(std::string_view sym) {
  static constexpr std::array<std::string_view, 10> kSet = {
      "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  return std::find(kSet.begin(), kSet.end(), sym) != kSet.end();
}

inline bool is_known_element(std::string_view sym) {
  return is_organic_subset(sym) || sym == "H";
}

}  // namespace detail

/// Parses the SMILES subset the datasets use: organic-subset atoms,
/// bracket atoms with charge (plus group tokens such as R1 or NO2),
/// branches, ring-closure digits, bond symbols - = #, and lowercase
/// aromatic atoms which are kekulized deterministically. Explicit
/// hydrogens are collapsed. Stereo marks, isotopes and multi-fragment
/// input are reported as unsupported.
inline ParseResult<MolGraph> parse_smiles(std::string_view text) {
  using detail::SmilesAtom;
  using detail::SmilesBond;
  using detail::SmilesEdge;

  ParseResult<MolGraph> result;
  auto fail = [&](int col, std::string msg) -> ParseResult<MolGraph>& {
    result.diagnostics.push_back({1, col, std::move(msg)});
    result.value.reset();
    return result;
  };

  // Trim surrounding whitespace; SMILES bodies themselves contain none.
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    fail(1, "empty input");
    return result;
  }
  std::string_view s = text.substr(begin, end - begin + 1);

  std::vector<SmilesAtom> atoms;
  std::vector<SmilesEdge> edges;
  std::vector<int> branch_stack;
  int prev = -1;
  SmilesBond pending = SmilesBond::Implicit;
  bool pending_set = false;
  struct RingSlot {
    int atom = -1;
    SmilesBond bond = SmilesBond::Implicit;
    bool bond_set = false;
    int column = 0;
  };
  std::map<int, RingSlot> rings;

  auto add_edge = [&](int a, int b, SmilesBond bond, int col) -> bool {
    if (a == b) {
      fail(col, "ring bond closes onto its own atom");
      return false;
    }
    for (const SmilesEdge& e : edges) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) {
        fail(col, "duplicate bond between atoms");
        return false;
      }
    }
    edges.push_back({a, b, bond});
    return true;
  };

  auto attach_atom = [&](SmilesAtom atom, int col) -> bool {
    atoms.push_back(std::move(atom));
    int idx = static_cast<int>(atoms.size()) - 1;
    if (prev >= 0) {
      if (!add_edge(prev, idx, pending, col)) return false;
    } else if (pending_set) {
      fail(col, "bond symbol with no preceding atom");
      return false;
    }
    pending = SmilesBond::Implicit;
    pending_set = false;
    prev = idx;
    return true;
  };

  auto close_ring = [&](int number, int col) -> bool {
    if (prev < 0) {
      fail(col, "ring bond digit before any atom");
      return false;
    }
    auto it = rings.find(number);
    if (it == rings.end()) {
      rings[number] = {prev, pending, pending_set, col};
      pending = SmilesBond::Implicit;
      pending_set = false;
      return true;
    }
    RingSlot slot = it->second;
    rings.erase(it);
    SmilesBond bond = SmilesBond::Implicit;
    if (slot.bond_set && pending_set && slot.bond != pending) {
      fail(col, "ring bond " + std::to_string(number) + " closed with conflicting order");
      return false;
    }
    if (slot.bond_set) bond = slot.bond;
    if (pending_set) bond = pending;
    pending = SmilesBond::Implicit;
    pending_set = false;
    return add_edge(slot.atom, prev, bond, col);
  };

  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const int col = static_cast<int>(begin + i) + 1;
    const char c = s[i];
    if (c == '(') {
      if (prev < 0) {
        fail(col, "branch opened before any atom");
        return result;
      }
      branch_stack.push_back(prev);
      ++i;
    } else if (c == ')') {
      if (branch_stack.empty()) {
        fail(col, "unmatched ')'");
        return result;
      }
      prev = branch_stack.back();
      branch_stack.pop_back();
      ++i;
    } else if (c == '-' || c == '=' || c == '#') {
      if (pending_set) {
        fail(col, "two bond symbols in a row");
        return result;
      }
      pending = c == '-' ? SmilesBond::Single
                         : (c == '=' ? SmilesBond::Double : SmilesBond::Triple);
      pending_set = true;
      ++i;
    } else if (c == '.') {
      fail(col, "multi-fragment input ('.') is not supported");
      return result;
    } else if (c == '/' || c == '\\') {
      fail(col, "stereo bond marks are not supported");
      return result;
    } else if (c == ':') {
      fail(col, "explicit aromatic bond ':' is not supported; use lowercase atoms");
      return result;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (!close_ring(c - '0', col)) return result;
      ++i;
    } else if (c == '%') {
      if (i + 2 >= n || !std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s[i + 2]))) {
        fail(col, "'%' must be followed by two digits");
        return result;
      }
      if (!close_ring((s[i + 1] - '0') * 10 + (s[i + 2] - '0'), col)) return result;
      i += 3;
    } else if (c == '[') {
      std::size_t close = s.find(']', i);
      if (close == std::string_view::npos) {
        fail(col, "unbalanced '['");
        return result;
      }
      std::string_view body = s.substr(i + 1, close - i - 1);
      if (body.empty()) {
        fail(col, "empty bracket atom");
        return result;
      }
      if (std::isdigit(static_cast<unsigned char>(body[0]))) {
        fail(col, "isotope specifications are not supported");
        return result;
      }
      SmilesAtom atom;
      std::size_t p = 0;
      // element symbol, uppercase or aromatic lowercase
      if (std::isupper(static_cast<unsigned char>(body[0]))) {
        std::string sym(1, body[0]);
        p = 1;
        if (p < body.size() && std::islower(static_cast<unsigned char>(body[p])) &&
            detail::is_known_element(sym + body[p]))
          sym += body[p++];
        atom.token = sym;
      } else if (std::islower(static_cast<unsigned char>(body[0])) &&
                 std::string_view("bcnops").find(body[0]) != std::string_view::npos) {
        atom.token = std::string(1, static_cast<char>(std::toupper(body[0])));
        atom.aromatic = true;
        p = 1;
      } else {
        fail(col, "unrecognized bracket atom");
        return result;
      }
      atom.bracket_hcount = 0;
      bool standard = detail::is_known_element(atom.token) || atom.aromatic;
      if (standard) {
        if (p < body.size() && body[p] == '@') {
          fail(col, "stereochemistry is not supported");
          return result;
        }
        if (p < body.size() && body[p] == 'H') {
          ++p;
          int h = 1;
          if (p < body.size() && std::isdigit(static_cast<unsigned char>(body[p])))
            h = body[p++] - '0';
          atom.bracket_hcount = h;
        }
      }
      // group token fallback: the rest of the body (minus charge) joins
      // the symbol, e.g. [R1] or [NO2]
      auto parse_charge = [&](std::size_t q) -> std::optional<std::size_t> {
        if (q >= body.size()) return q;
        char sign = body[q];
        if (sign != '+' && sign != '-') return std::nullopt;
        int mag = 1;
        ++q;
        if (q < body.size() && std::isdigit(static_cast<unsigned char>(body[q]))) {
          mag = body[q++] - '0';
        } else {
          while (q < body.size() && body[q] == sign) {
            ++mag;
            ++q;
          }
        }
        atom.charge = sign == '+' ? mag : -mag;
        return q;
      };
      auto rest = parse_charge(p);
      if (!rest || *rest != body.size()) {
        if (atom.aromatic) {
          fail(col, "unrecognized bracket atom content");
          return result;
        }
        // retry as a group token: leading uppercase, then alphanumerics,
        // then optional charge
        std::size_t q = 1;
        while (q < body.size() &&
               std::isalnum(static_cast<unsigned char>(body[q])) )
          ++q;
        atom.token = std::string(body.substr(0, q));
        atom.charge = 0;
        atom.bracket_hcount = 0;
        auto rest2 = parse_charge(q);
        if (!rest2 || *rest2 != body.size()) {
          fail(col, "unrecognized bracket atom content");
          return result;
        }
      }
      if (atom.charge < -4 || atom.charge > 4) {
        fail(col, "charge outside supported range [-4, +4]");
        return result;
      }
      if (!attach_atom(std::move(atom), col)) return result;
      i = close + 1;
    } else if (c == ']') {
      fail(col, "unbalanced ']'");
      return result;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      std::size_t adv = 1;
      if (i + 1 < n && std::islower(static_cast<unsigned char>(s[i + 1])) &&
          detail::is_organic_subset(sym + s[i + 1])) {
        sym += s[i + 1];
        adv = 2;
      }
      if (!detail::is_organic_subset(sym)) {
        fail(col, std::string("atom '") + sym + "' must be written in brackets");
        return result;
      }
      SmilesAtom atom;
      atom.token = sym;
      if (!attach_atom(std::move(atom), col)) return result;
      i += adv;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      if (std::string_view("bcnops").find(c) == std::string_view::npos) {
        fail(col, std::string("unrecognized aromatic atom '") + c + "'");
        return result;
      }
      SmilesAtom atom;
      atom.token = std::string(1, static_cast<char>(std::toupper(c)));
      atom.aromatic = true;
      if (!attach_atom(std::move(atom), col)) return result;
      ++i;
    } else if (c == '*') {
      fail(col, "wildcard atom '*' is not supported");
      return result;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      fail(col, "whitespace inside SMILES body");
      return result;
    } else {
      fail(col, std::string("unexpected character '") + c + "'");
      return result;
    }
  }

  if (pending_set) {
    fail(static_cast<int>(begin + n), "dangling bond symbol at end of input");
    return result;
  }
  if (!branch_stack.empty()) {
    fail(static_cast<int>(begin + n), "unbalanced '(': branch never closed");
    return result;
  }
  if (!rings.empty()) {
    const auto& [number, slot] = *rings.begin();
    fail(slot.column, "unclosed ring bond " + std::to_string(number));
    return result;
  }
  if (atoms.empty()) {
    fail(1, "no atoms in input");
    return result;
  }

  // Resolve bond orders. Implicit bonds between two aromatic atoms form
  // the aromatic subgraph to kekulize; all other implicit bonds are
  // single.
  const int natoms = static_cast<int>(atoms.size());
  std::vector<int> final_order(edges.size(), 1);
  std::vector<int> aromatic_edges;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const SmilesEdge& e = edges[k];
    if (e.bond == SmilesBond::Implicit) {
      if (atoms[e.a].aromatic && atoms[e.b].aromatic) {
        aromatic_edges.push_back(static_cast<int>(k));
        final_order[k] = 1;
      }
    } else {
      final_order[k] = static_cast<int>(e.bond);
    }
  }

  if (!aromatic_edges.empty() ||
      std::any_of(atoms.begin(), atoms.end(), [](const SmilesAtom& a) { return a.aromatic; })) {
    // An aromatic atom still needs one double bond when its normal
    // valence is not already used up by sigma bonds and bracket
    // hydrogens (pyrrole [nH] and furan o are satisfied; benzene c and
    // pyridine n are not).
    std::vector<int> used(natoms, 0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      used[edges[k].a] += final_order[k];
      used[edges[k].b] += final_order[k];
    }
    std::vector<char> needs_pi(natoms, 0);
    for (int a = 0; a < natoms; ++a) {
      if (!atoms[a].aromatic) continue;
      int v = detail::effective_valence(atoms[a].token, atoms[a].charge);
      int h = atoms[a].bracket_hcount > 0 ? atoms[a].bracket_hcount : 0;
      if (v - used[a] - h >= 1) needs_pi[a] = 1;
    }
    std::vector<std::vector<std::pair<int, int>>> arom_adj(natoms);  // (nbr, edge)
    for (int k : aromatic_edges) {
      arom_adj[edges[k].a].emplace_back(edges[k].b, k);
      arom_adj[edges[k].b].emplace_back(edges[k].a, k);
    }
    for (auto& lst : arom_adj) std::sort(lst.begin(), lst.end());

    // Perfect matching over the atoms that need a double bond, taking
    // the lowest unmatched atom and its lowest eligible neighbor first,
    // backtracking when stuck. The first matching found is the result.
    std::vector<int> match(natoms, -1);
    auto kekulize = [&](auto&& self, int from) -> bool {
      int u = -1;
      for (int a = from; a < natoms; ++a) {
        if (needs_pi[a] && match[a] < 0) {
          u = a;
          break;
        }
      }
      if (u < 0) return true;
      for (auto [v, k] : arom_adj[u]) {
        if (!needs_pi[v] || match[v] >= 0) continue;
        match[u] = v;
        match[v] = u;
        final_order[k] = 2;
        if (self(self, u + 1)) return true;
        final_order[k] = 1;
        match[u] = -1;
        match[v] = -1;
      }
      return false;
    };
    if (!kekulize(kekulize, 0)) {
      fail(1, "kekulization failed: no assignment of alternating double bonds exists");
      return result;
    }
  }

  // Assemble the graph, collapsing explicit hydrogens.
  std::vector<int> remap(natoms, -1);
  MolGraph graph;
  for (int a = 0; a < natoms; ++a) {
    if (atoms[a].token == "H") continue;
    remap[a] = graph.node_count();
    graph.atoms.push_back({atoms[a].token, atoms[a].charge});
  }
  if (graph.atoms.empty()) {
    fail(1, "molecule has no heavy atoms");
    return result;
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    int a = remap[edges[k].a];
    int b = remap[edges[k].b];
    if (a < 0 || b < 0) continue;  // bond to collapsed hydrogen
    graph.edges.emplace_back(a, b, static_cast<BondOrder>(final_order[k]));
  }

  if (auto err = validate(graph)) {
    fail(1, "invalid molecule: " + *err);
    return result;
  }
  result.value = std::move(graph);
  return result;
}

}  // namespace graphalign

#endif
