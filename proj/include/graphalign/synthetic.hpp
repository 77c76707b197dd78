// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_SYNTHETIC_HPP
#define GRAPHALIGN_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphalign/graph.hpp"
#include "graphalign/rng.hpp"
#include "graphalign/sample.hpp"

namespace graphalign {

/// Desk-scale stand-in for a trained recognition model: a per-label
/// confusion process whose error rate decays with training exposure.
/// Labels with zero exposure are "never seen" and are misread
/// deterministically through unseen_map, mirroring how an unfamiliar
/// glyph is consistently taken for a familiar one.
struct ConfusionModel {
  double epsilon0 = 0.3;  // error rate at zero effective exposure
  double tau = 200.0;     // exposure scale of the error decay

  std::map<AtomLabel, double> atom_exposure;
  std::map<BondOrder, double> bond_exposure;
  std::map<AtomLabel, AtomLabel> unseen_map;

  // Derived rows: emission distribution per truth label over the known
  // labels. Rebuilt after every exposure change.
  std::map<AtomLabel, std::vector<std::pair<AtomLabel, double>>> atom_confusion;
  std::map<BondOrder, std::vector<std::pair<BondOrder, double>>> bond_confusion;

  double correct_probability(double exposure) const {
    return 1.0 - epsilon0 * std::exp(-exposure / tau);
  }

  void rebuild_rows() {
    atom_confusion.clear();
    std::vector<AtomLabel> known;
    for (const auto& [label, c] : atom_exposure)
      if (c > 0) known.push_back(label);
    for (const AtomLabel& label : known) {
      double p = correct_probability(atom_exposure.at(label));
      std::vector<std::pair<AtomLabel, double>> row;
      if (known.size() == 1) {
        row.emplace_back(label, 1.0);
      } else {
        double spread = (1.0 - p) / static_cast<double>(known.size() - 1);
        for (const AtomLabel& other : known)
          row.emplace_back(other, other == label ? p : spread);
      }
      atom_confusion[label] = std::move(row);
    }
    bond_confusion.clear();
    std::vector<BondOrder> known_bonds;
    for (const auto& [order, c] : bond_exposure)
      if (c > 0) known_bonds.push_back(order);
    for (BondOrder order : known_bonds) {
      double p = correct_probability(bond_exposure.at(order));
      std::vector<std::pair<BondOrder, double>> row;
      if (known_bonds.size() == 1) {
        row.emplace_back(order, 1.0);
      } else {
        double spread = (1.0 - p) / static_cast<double>(known_bonds.size() - 1);
        for (BondOrder other : known_bonds)
          row.emplace_back(other, other == order ? p : spread);
      }
      bond_confusion[order] = std::move(row);
    }
  }

  bool atom_known(const AtomLabel& l) const {
    auto it = atom_exposure.find(l);
    return it != atom_exposure.end() && it->second > 0;
  }
  bool bond_known(BondOrder o) const {
    auto it = bond_exposure.find(o);
    return it != bond_exposure.end() && it->second > 0;
  }

  /// Deterministic misread for a label outside the training vocabulary.
  AtomLabel unseen_emission(const AtomLabel& l) const {
    auto it = unseen_map.find(l);
    if (it != unseen_map.end()) return it->second;
    // no configured misread: collapse onto the first known label
    for (const auto& [label, c] : atom_exposure)
      if (c > 0) return label;
    return l;
  }
  BondOrder unseen_bond_emission() const {
    BondOrder best = BondOrder::Single;
    double best_count = -1.0;
    for (const auto& [order, c] : bond_exposure) {
      if (c > best_count) {
        best_count = c;
        best = order;
      }
    }
    return best;
  }
};

/// Builds a pretrained model whose per-label error rate equals
/// `atom_error` / `bond_error` by assigning the matching exposure on the
/// decay curve. Labels in unseen_map start with zero exposure.
inline ConfusionModel make_confusion_model(
    const std::vector<AtomLabel>& known_atoms, const std::vector<BondOrder>& known_bonds,
    double atom_error, double bond_error,
    std::map<AtomLabel, AtomLabel> unseen_map = {}, double epsilon0 = 0.3,
    double tau = 200.0) {
  if (atom_error <= 0 || atom_error > epsilon0 || bond_error <= 0 || bond_error > epsilon0)
    throw std::invalid_argument("error rates must lie in (0, epsilon0]");
  ConfusionModel m;
  m.epsilon0 = epsilon0;
  m.tau = tau;
  m.unseen_map = std::move(unseen_map);
  const double atom_exposure = tau * std::log(epsilon0 / atom_error);
  const double bond_exposure = tau * std::log(epsilon0 / bond_error);
  for (const AtomLabel& l : known_atoms) m.atom_exposure[l] = atom_exposure;
  for (BondOrder o : known_bonds) m.bond_exposure[o] = bond_exposure;
  for (const auto& [unseen, seen] : m.unseen_map) {
    if (!m.atom_known(seen))
      throw std::invalid_argument("unseen_map target " + seen.str() + " is not a known label");
    if (m.atom_known(unseen))
      throw std::invalid_argument("unseen_map source " + unseen.str() + " is already known");
    m.atom_exposure.emplace(unseen, 0.0);
  }
  m.rebuild_rows();
  return m;
}

/// A generated sample: the dataset record plus the hidden embedding that
/// plays the role of the image content.
struct SyntheticSample {
  Sample sample;
  PlanarEmbedding hidden_truth;
};

struct GenVocab {
  std::vector<AtomLabel> atoms;  // duplicates act as sampling weights
  std::vector<BondOrder> bonds;
};

namespace detail {

// Spring layout; quality is irrelevant, we only need deterministic,
// pairwise-distinct pixel coordinates.
inline std::vector<Vec2> layout_coords(const MolGraph& g, std::mt19937_64& rng) {
  const int n = g.node_count();
  std::vector<Vec2> pos(n);
  const double radius = 40.0 + 12.0 * std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    double angle = 2.0 * 3.141592653589793 * i / n + 0.25 * draw_unit(rng);
    pos[i] = {radius * std::cos(angle), radius * std::sin(angle)};
  }
  const double k = 28.0;
  auto adj = adjacency_lists(g);
  for (int step = 0; step < 120; ++step) {
    const double heat = 12.0 * (1.0 - step / 120.0) + 0.5;
    std::vector<Vec2> disp(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
        double d2 = dx * dx + dy * dy + 1e-6;
        double f = k * k / d2;
        disp[i].x += dx * f;
        disp[i].y += dy * f;
        disp[j].x -= dx * f;
        disp[j].y -= dy * f;
      }
    }
    for (const Edge& e : g.edges) {
      double dx = pos[e.a].x - pos[e.b].x, dy = pos[e.a].y - pos[e.b].y;
      double d = std::sqrt(dx * dx + dy * dy) + 1e-6;
      double f = (d - k) / d * 0.5;
      disp[e.a].x -= dx * f;
      disp[e.a].y -= dy * f;
      disp[e.b].x += dx * f;
      disp[e.b].y += dy * f;
    }
    for (int i = 0; i < n; ++i) {
      double len = std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y) + 1e-9;
      double lim = std::min(len, heat);
      pos[i].x += disp[i].x / len * lim;
      pos[i].y += disp[i].y / len * lim;
    }
  }
  double minx = 1e18, miny = 1e18;
  for (const Vec2& p : pos) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
  }
  for (Vec2& p : pos) {
    p.x = std::round((p.x - minx + 10.0) * 100.0) / 100.0;
    p.y = std::round((p.y - miny + 10.0) * 100.0) / 100.0;
  }
  // resolve the rare exact collision deterministically
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      while (pos[i] == pos[j]) pos[j].x += 0.37;
  return pos;
}

}  // namespace detail

/// Random connected molecule-shaped graphs: a random attachment tree
/// plus up to three ring-closing edges, labels drawn from the vocab,
/// coordinates from a spring layout. Deterministic per seed.
inline std::vector<SyntheticSample> generate_dataset(std::uint64_t seed, int n,
                                                     const GenVocab& vocab,
                                                     std::pair<int, int> size_range,
                                                     const std::string& id_prefix = "s") {
  if (vocab.atoms.empty() || vocab.bonds.empty())
    throw std::invalid_argument("vocab must name at least one atom and bond label");
  auto [lo, hi] = size_range;
  if (lo < 2 || hi > 60 || lo > hi)
    throw std::invalid_argument("size_range must lie within [2, 60]");
  if (n < 0) throw std::invalid_argument("negative sample count");

  std::vector<SyntheticSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(seed_combine(seed, static_cast<std::uint64_t>(i)));
    const int nn = lo + static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    MolGraph g;
    g.atoms.reserve(nn);
    for (int v = 0; v < nn; ++v)
      g.atoms.push_back(vocab.atoms[draw_below(rng, vocab.atoms.size())]);
    for (int v = 1; v < nn; ++v) {
      int parent = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(v)));
      g.edges.emplace_back(parent, v, vocab.bonds[draw_below(rng, vocab.bonds.size())]);
    }
    const int extra = static_cast<int>(draw_below(rng, 4));
    for (int t = 0; t < extra; ++t) {
      int a = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(nn)));
      int b = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(nn)));
      if (a == b) continue;
      Edge probe(a, b, BondOrder::Single);
      bool dup = false;
      for (const Edge& e : g.edges)
        if (e.a == probe.a && e.b == probe.b) { dup = true; break; }
      if (dup) continue;
      g.edges.emplace_back(a, b, vocab.bonds[draw_below(rng, vocab.bonds.size())]);
    }

    SyntheticSample s;
    s.hidden_truth.coords = detail::layout_coords(g, rng);
    s.hidden_truth.graph = std::move(g);
    std::string num = std::to_string(i);
    s.sample.id = id_prefix + std::string(6 - std::min<std::size_t>(6, num.size()), '0') + num;
    s.sample.input_ref = s.sample.id;
    s.sample.normal_label = s.hidden_truth.graph;
    out.push_back(std::move(s));
  }
  return out;
}

/// Resamples every label of the hidden truth through the confusion rows;
/// topology and coordinates are untouched. Deterministic per
/// (model, stream key, seed).
inline PlanarEmbedding sim_predict_embedding(const ConfusionModel& m,
                                             const PlanarEmbedding& truth,
                                             std::string_view stream_key,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed_combine(seed, stream_key));
  PlanarEmbedding out = truth;
  for (AtomLabel& label : out.graph.atoms) {
    if (!m.atom_known(label)) {
      label = m.unseen_emission(label);
      continue;
    }
    const auto& row = m.atom_confusion.at(label);
    double u = draw_unit(rng);
    double acc = 0.0;
    for (const auto& [emit, p] : row) {
      acc += p;
      if (u < acc) {
        label = emit;
        break;
      }
    }
  }
  for (Edge& e : out.graph.edges) {
    if (!m.bond_known(e.order)) {
      e.order = m.unseen_bond_emission();
      continue;
    }
    const auto& row = m.bond_confusion.at(e.order);
    double u = draw_unit(rng);
    double acc = 0.0;
    for (const auto& [emit, p] : row) {
      acc += p;
      if (u < acc) {
        e.order = emit;
        break;
      }
    }
  }
  return out;
}

inline PlanarEmbedding sim_predict(const ConfusionModel& m, const SyntheticSample& s,
                                   std::uint64_t seed) {
  return sim_predict_embedding(m, s.hidden_truth, s.sample.id, seed);
}

/// Log-likelihood of a candidate under the per-position emission rows
/// the model uses at predict time. Probabilities are floored so the
/// result stays finite.
inline double sim_score_embedding(const ConfusionModel& m, const PlanarEmbedding& truth,
                                  const PlanarEmbedding& candidate) {
  constexpr double kFloor = 1e-9;
  if (candidate.graph.node_count() != truth.graph.node_count() ||
      candidate.graph.edge_count() != truth.graph.edge_count())
    throw std::invalid_argument("candidate topology differs from prediction topology");
  for (int e = 0; e < truth.graph.edge_count(); ++e)
    if (candidate.graph.edges[e].a != truth.graph.edges[e].a ||
        candidate.graph.edges[e].b != truth.graph.edges[e].b)
      throw std::invalid_argument("candidate topology differs from prediction topology");

  double total = 0.0;
  for (int v = 0; v < truth.graph.node_count(); ++v) {
    const AtomLabel& t = truth.graph.atoms[v];
    const AtomLabel& c = candidate.graph.atoms[v];
    double p = kFloor;
    if (!m.atom_known(t)) {
      p = (c == m.unseen_emission(t)) ? 1.0 : kFloor;
    } else {
      for (const auto& [emit, prob] : m.atom_confusion.at(t))
        if (emit == c) { p = std::max(prob, kFloor); break; }
    }
    total += std::log(p);
  }
  for (int e = 0; e < truth.graph.edge_count(); ++e) {
    const BondOrder t = truth.graph.edges[e].order;
    const BondOrder c = candidate.graph.edges[e].order;
    double p = kFloor;
    if (!m.bond_known(t)) {
      p = (c == m.unseen_bond_emission()) ? 1.0 : kFloor;
    } else {
      for (const auto& [emit, prob] : m.bond_confusion.at(t))
        if (emit == c) { p = std::max(prob, kFloor); break; }
    }
    total += std::log(p);
  }
  return total;
}

inline double sim_score(const ConfusionModel& m, const SyntheticSample& s,
                        const PlanarEmbedding& candidate) {
  return sim_score_embedding(m, s.hidden_truth, candidate);
}

/// Adds the rich labels' occurrence counts (weighted by copies) to the
/// exposure table and refreshes the confusion rows. Labels that gained
/// exposure stop being unseen.
inline ConfusionModel sim_retrain(const ConfusionModel& model,
                                  const std::vector<WeightedSample>& rich) {
  ConfusionModel m = model;
  for (const WeightedSample& ws : rich) {
    if (!ws.sample.rich_label || ws.copies <= 0) continue;
    const MolGraph& g = ws.sample.rich_label->graph;
    for (const AtomLabel& a : g.atoms)
      m.atom_exposure[a] += static_cast<double>(ws.copies);
    for (const Edge& e : g.edges)
      m.bond_exposure[e.order] += static_cast<double>(ws.copies);
  }
  for (auto it = m.unseen_map.begin(); it != m.unseen_map.end();) {
    if (m.atom_known(it->first))
      it = m.unseen_map.erase(it);
    else
      ++it;
  }
  m.rebuild_rows();
  return m;
}

/// Predictor interface over the confusion model. input_ref keys into the
/// hidden-truth table. Prediction noise is redrawn after each retrain.
class SimPredictor : public Predictor {
 public:
  SimPredictor(ConfusionModel model, std::map<std::string, PlanarEmbedding> truths,
               std::uint64_t seed)
      : model_(std::move(model)), truths_(std::move(truths)), seed_(seed) {}

  std::vector<std::optional<PlanarEmbedding>> predict(
      const std::vector<PredictRequest>& requests) override {
    std::vector<std::optional<PlanarEmbedding>> out;
    out.reserve(requests.size());
    const std::uint64_t epoch_seed = seed_combine(seed_, static_cast<std::uint64_t>(epoch_));
    for (const PredictRequest& r : requests) {
      auto it = truths_.find(r.input_ref);
      if (it == truths_.end()) {
        out.push_back(std::nullopt);
        continue;
      }
      out.push_back(sim_predict_embedding(model_, it->second, r.input_ref, epoch_seed));
    }
    return out;
  }

  std::vector<double> score(const std::vector<ScoreRequest>& requests) override {
    std::vector<double> out;
    out.reserve(requests.size());
    for (const ScoreRequest& r : requests) {
      auto it = truths_.find(r.input_ref);
      if (it == truths_.end())
        throw std::invalid_argument("score request for unknown input_ref " + r.input_ref);
      out.push_back(sim_score_embedding(model_, it->second, r.candidate));
    }
    return out;
  }

  void retrain(const std::vector<WeightedSample>& source_rich,
               const std::vector<WeightedSample>& target_rich) override {
    std::vector<WeightedSample> all = source_rich;
    all.insert(all.end(), target_rich.begin(), target_rich.end());
    model_ = sim_retrain(model_, all);
    ++epoch_;
  }

  const ConfusionModel& model() const { return model_; }
  int epoch() const { return epoch_; }

 private:
  ConfusionModel model_;
  std::map<std::string, PlanarEmbedding> truths_;
  std::uint64_t seed_ = 0;
  int epoch_ = 0;
};

}  // namespace graphalign

#endif
