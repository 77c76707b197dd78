// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_MOLFILE_HPP
#define GRAPHALIGN_MOLFILE_HPP

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphalign/graph.hpp"
#include "graphalign/parse.hpp"

namespace graphalign {
namespace detail {

inline std::string_view field(std::string_view line, std::size_t col0, std::size_t width) {
  if (col0 >= line.size()) return {};
  std::string_view f = line.substr(col0, width);
  std::size_t b = f.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  std::size_t e = f.find_last_not_of(' ');
  return f.substr(b, e - b + 1);
}

inline bool parse_int_field(std::string_view f, int& out) {
  if (f.empty()) return false;
  auto res = std::from_chars(f.data(), f.data() + f.size(), out);
  return res.ec == std::errc() && res.ptr == f.data() + f.size();
}

inline bool parse_double_field(std::string_view f, double& out) {
  if (f.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(std::string(f), &used);
    return used == f.size();
  } catch (...) {
    return false;
  }
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

}  // namespace detail

struct MolfileOptions {
  double pixels_per_unit = 1.0;  // scale applied to the x,y columns
};

/// Reads a V2000 connection table: 3 header lines, counts line, atom
/// block (x y z symbol), bond block (a b order), optional M CHG
/// properties. Explicit hydrogens are collapsed; z is ignored.
inline ParseResult<PlanarEmbedding> parse_molfile(std::string_view text,
                                                  const MolfileOptions& options = {}) {
  ParseResult<PlanarEmbedding> result;
  auto fail = [&](int line, std::string msg) {
    result.diagnostics.push_back({line, 1, std::move(msg)});
    result.value.reset();
  };

  auto lines = detail::split_lines(text);
  if (lines.size() < 4) {
    fail(static_cast<int>(lines.size()), "truncated file: no counts line");
    return result;
  }
  const std::string_view counts = lines[3];
  int natoms = 0, nbonds = 0;
  if (!detail::parse_int_field(detail::field(counts, 0, 3), natoms) ||
      !detail::parse_int_field(detail::field(counts, 3, 3), nbonds) || natoms <= 0 ||
      nbonds < 0) {
    fail(4, "malformed counts line");
    return result;
  }
  if (lines.size() < 4 + static_cast<std::size_t>(natoms) + static_cast<std::size_t>(nbonds)) {
    fail(static_cast<int>(lines.size()), "truncated file: fewer lines than counts declare");
    return result;
  }

  struct RawAtom {
    double x = 0, y = 0;
    std::string symbol;
    int charge = 0;
  };
  std::vector<RawAtom> raw(natoms);
  for (int a = 0; a < natoms; ++a) {
    const int lineno = 5 + a;
    std::string_view line = lines[4 + a];
    RawAtom& r = raw[a];
    double z = 0;
    if (!detail::parse_double_field(detail::field(line, 0, 10), r.x) ||
        !detail::parse_double_field(detail::field(line, 10, 10), r.y) ||
        !detail::parse_double_field(detail::field(line, 20, 10), z)) {
      fail(lineno, "malformed atom coordinates");
      return result;
    }
    std::string_view sym = detail::field(line, 31, 3);
    if (sym.empty()) {
      fail(lineno, "missing atom symbol");
      return result;
    }
    r.symbol = std::string(sym);
    int ccc = 0;
    if (detail::parse_int_field(detail::field(line, 36, 3), ccc)) {
      // old-style charge code: 1..7 maps +3..-3, 4 is a radical
      static constexpr int kChargeMap[8] = {0, 3, 2, 1, 0, -1, -2, -3};
      if (ccc >= 0 && ccc <= 7) r.charge = kChargeMap[ccc];
    }
  }

  struct RawBond {
    int a = 0, b = 0;
    BondOrder order = BondOrder::Single;
  };
  std::vector<RawBond> rawbonds(nbonds);
  for (int b = 0; b < nbonds; ++b) {
    const int lineno = 5 + natoms + b;
    std::string_view line = lines[4 + natoms + b];
    int a1 = 0, a2 = 0, order = 0;
    if (!detail::parse_int_field(detail::field(line, 0, 3), a1) ||
        !detail::parse_int_field(detail::field(line, 3, 3), a2) ||
        !detail::parse_int_field(detail::field(line, 6, 3), order)) {
      fail(lineno, "malformed bond line");
      return result;
    }
    if (a1 < 1 || a1 > natoms || a2 < 1 || a2 > natoms) {
      fail(lineno, "bond references atom index out of range");
      return result;
    }
    if (order == 4) {
      fail(lineno, "aromatic bond order 4 is not supported: kekulize upstream");
      return result;
    }
    if (order < 1 || order > 3) {
      fail(lineno, "unsupported bond order " + std::to_string(order));
      return result;
    }
    rawbonds[b] = {a1 - 1, a2 - 1, static_cast<BondOrder>(order)};
  }

  // Property block: M CHG resets and replaces all atom-block charges.
  bool saw_chg = false;
  for (std::size_t l = 4 + natoms + nbonds; l < lines.size(); ++l) {
    std::string_view line = lines[l];
    if (line.rfind("M  END", 0) == 0) break;
    if (line.rfind("M  CHG", 0) == 0) {
      if (!saw_chg) {
        for (RawAtom& r : raw) r.charge = 0;
        saw_chg = true;
      }
      int count = 0;
      if (!detail::parse_int_field(detail::field(line, 6, 3), count) || count < 1 ||
          count > 8) {
        fail(static_cast<int>(l + 1), "malformed M CHG line");
        return result;
      }
      for (int k = 0; k < count; ++k) {
        int idx = 0, chg = 0;
        if (!detail::parse_int_field(detail::field(line, 9 + 8 * k, 4), idx) ||
            !detail::parse_int_field(detail::field(line, 13 + 8 * k, 4), chg) || idx < 1 ||
            idx > natoms) {
          fail(static_cast<int>(l + 1), "malformed M CHG entry");
          return result;
        }
        raw[idx - 1].charge = chg;
      }
    }
  }

  // Collapse explicit hydrogens and build the embedding.
  std::vector<int> remap(natoms, -1);
  PlanarEmbedding v;
  for (int a = 0; a < natoms; ++a) {
    if (raw[a].symbol == "H") continue;
    remap[a] = v.graph.node_count();
    v.graph.atoms.push_back({raw[a].symbol, raw[a].charge});
    v.coords.push_back(
        {raw[a].x * options.pixels_per_unit, raw[a].y * options.pixels_per_unit});
  }
  if (v.graph.atoms.empty()) {
    fail(5, "molecule has no heavy atoms");
    return result;
  }
  for (const RawBond& rb : rawbonds) {
    int a = remap[rb.a];
    int b = remap[rb.b];
    if (a < 0 || b < 0) continue;
    v.graph.edges.emplace_back(a, b, rb.order);
  }

  if (auto err = validate(v)) {
    fail(1, "invalid molecule: " + *err);
    return result;
  }
  result.value = std::move(v);
  return result;
}

/// Writes a V2000 connection table. Output is byte-stable: no
/// timestamps, fixed formatting. Charges are emitted as M CHG lines.
/// Throws when the embedding exceeds the format (more than 999 nodes or
/// bonds, coordinates outside the 10-column field, symbols longer than
/// the 3-column field).
inline std::string write_molfile(const PlanarEmbedding& v,
                                 const std::string& name = "graphalign") {
  const int n = v.graph.node_count();
  const int m = v.graph.edge_count();
  if (n > 999 || m > 999)
    throw std::invalid_argument("molecule exceeds V2000 capacity (999 atoms/bonds)");
  if (v.coords.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("embedding has mismatched coordinate count");

  std::string out;
  out.reserve(128 + 70 * n + 22 * m);
  out += name;
  out += "\n  graphalign 2D\n\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n", n, m);
  out += buf;
  for (int a = 0; a < n; ++a) {
    const AtomLabel& lbl = v.graph.atoms[a];
    if (lbl.token.size() > 3)
      throw std::invalid_argument("atom token '" + lbl.token +
                                  "' does not fit the V2000 symbol field");
    double x = v.coords[a].x, y = v.coords[a].y;
    if (x <= -10000.0 || x >= 100000.0 || y <= -10000.0 || y >= 100000.0)
      throw std::invalid_argument("coordinate outside V2000 field width");
    std::snprintf(buf, sizeof buf, "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  x, y, 0.0, lbl.token.c_str());
    out += buf;
  }
  for (const Edge& e : v.graph.edges) {
    std::snprintf(buf, sizeof buf, "%3d%3d%3d  0  0  0  0\n", e.a + 1, e.b + 1,
                  static_cast<int>(e.order));
    out += buf;
  }
  std::vector<std::pair<int, int>> charged;
  for (int a = 0; a < n; ++a)
    if (v.graph.atoms[a].charge != 0) charged.emplace_back(a + 1, v.graph.atoms[a].charge);
  for (std::size_t k = 0; k < charged.size(); k += 8) {
    std::size_t count = std::min<std::size_t>(8, charged.size() - k);
    std::snprintf(buf, sizeof buf, "M  CHG%3d", static_cast<int>(count));
    out += buf;
    for (std::size_t j = 0; j < count; ++j) {
      std::snprintf(buf, sizeof buf, "%4d%4d", charged[k + j].first, charged[k + j].second);
      out += buf;
    }
    out += '\n';
  }
  out += "M  END\n";
  return out;
}

}  // namespace graphalign

#endif
