// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_SELFLABEL_HPP
#define GRAPHALIGN_SELFLABEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "graphalign/align.hpp"
#include "graphalign/graph.hpp"
#include "graphalign/metrics.hpp"
#include "graphalign/rng.hpp"
#include "graphalign/sample.hpp"

namespace graphalign {

struct IterationReport {
  int iteration = 0;
  int n_aligned_exact = 0;      // empty correcting edit
  int n_aligned_corrected = 0;  // correcting edit of size >= 1
  int n_no_solution = 0;        // includes per-sample predictor failures
  int n_ties_discarded = 0;
  double test_graph_accuracy = 0.0;
  std::map<std::string, double> per_type_accuracy;  // atom/bond label -> fraction
  std::vector<std::string> labeled_ids;             // ids that received a rich label

  int labeled_total() const { return n_aligned_exact + n_aligned_corrected; }
};

struct PassOutput {
  std::vector<WeightedSample> rich;  // copies = 1, in target order
  IterationReport report;
  std::vector<std::string> notes;  // per-sample failure descriptions
};

/// One alignment pass over the target set: predict, search for minimal
/// correcting edits, resolve ties, promote survivors to rich labels.
/// Searches fan out over `threads` workers; results are merged in input
/// order and tie randomness is keyed by (seed, sample id), so thread
/// count never changes the outcome.
inline PassOutput self_label_pass(Predictor& predictor, const std::vector<Sample>& targets,
                                  const EditBudget& budget, TiePolicyKind policy,
                                  std::uint64_t seed, int threads = 1) {
  if (auto err = budget.validate()) throw std::invalid_argument(*err);
  for (const Sample& t : targets)
    if (!t.normal_label)
      throw std::invalid_argument("target sample " + t.id + " has no normal label");

  PassOutput out;
  const std::size_t n = targets.size();

  std::vector<PredictRequest> requests;
  requests.reserve(n);
  for (const Sample& t : targets) requests.push_back({t.id, t.input_ref});
  std::vector<std::optional<PlanarEmbedding>> predictions = predictor.predict(requests);
  if (predictions.size() != n)
    throw std::runtime_error("predictor returned a different number of predictions");

  struct SlotResult {
    AlignmentOutcome outcome;
    bool predicted = false;
  };
  std::vector<SlotResult> slots(n);

  auto work = [&](std::size_t i) {
    if (!predictions[i]) return;
    slots[i].predicted = true;
    slots[i].outcome = correcting_edit_search(*predictions[i], *targets[i].normal_label, budget);
  };
  const int workers = std::max(1, threads);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) work(i);
      });
    for (std::thread& t : pool) t.join();
  }

  // Likelihood policies: score every tie candidate in one batch.
  std::vector<std::vector<double>> tie_scores(n);
  if (policy_needs_scores(policy)) {
    std::vector<ScoreRequest> score_requests;
    std::vector<std::pair<std::size_t, std::size_t>> origin;  // (sample, tie index)
    for (std::size_t i = 0; i < n; ++i) {
      if (!slots[i].predicted || slots[i].outcome.kind != AlignmentOutcome::Kind::Ties)
        continue;
      const auto& ties = slots[i].outcome.edits;
      tie_scores[i].resize(ties.size());
      for (std::size_t k = 0; k < ties.size(); ++k) {
        score_requests.push_back({targets[i].id + "#" + std::to_string(k),
                                  targets[i].input_ref,
                                  apply_edit(ties[k], *predictions[i])});
        origin.emplace_back(i, k);
      }
    }
    if (!score_requests.empty()) {
      std::vector<double> scored = predictor.score(score_requests);
      if (scored.size() != score_requests.size())
        throw std::runtime_error("predictor returned a different number of scores");
      for (std::size_t r = 0; r < scored.size(); ++r)
        tie_scores[origin[r].first][origin[r].second] = scored[r];
    }
  }

  IterationReport& rep = out.report;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& target = targets[i];
    if (!slots[i].predicted) {
      ++rep.n_no_solution;
      out.notes.push_back("sample " + target.id + ": predictor produced no embedding");
      continue;
    }
    const AlignmentOutcome& outcome = slots[i].outcome;
    if (outcome.kind == AlignmentOutcome::Kind::NoSolution) {
      ++rep.n_no_solution;
      continue;
    }
    std::optional<Edit> edit;
    if (outcome.kind == AlignmentOutcome::Kind::Unique) {
      edit = outcome.unique();
    } else {
      TiePolicy tp{policy, seed_combine(seed, target.id)};
      auto idx = detail::resolve_tie_index(
          outcome.edits.size(), tp,
          policy_needs_scores(policy) ? &tie_scores[i] : nullptr);
      if (idx) edit = outcome.edits[*idx];
    }
    if (!edit) {
      ++rep.n_ties_discarded;
      continue;
    }
    if (edit->empty())
      ++rep.n_aligned_exact;
    else
      ++rep.n_aligned_corrected;

    Sample rich = target;
    rich.rich_label = edit->empty() ? *predictions[i] : apply_edit(*edit, *predictions[i]);
    rep.labeled_ids.push_back(target.id);
    out.rich.push_back({std::move(rich), 1});
  }
  return out;
}

struct UpsampleStrategy {
  enum class Kind { Uniform, RareThreshold };
  Kind kind = Kind::Uniform;
  long total = 20000;
  long min_occurrences = 0;  // RareThreshold only
};

/// Uniform: copies the multiset up to exactly `total`, extra copies to
/// the earliest ids. RareThreshold additionally duplicates samples
/// containing underrepresented atom labels (round-robin in id order)
/// until each label reaches min_occurrences or no sample contains it.
inline std::vector<WeightedSample> upsample(const std::vector<WeightedSample>& t,
                                            const UpsampleStrategy& strategy) {
  if (t.empty()) throw std::invalid_argument("upsample of an empty multiset");
  if (strategy.total < 0) throw std::invalid_argument("negative upsample total");

  std::vector<WeightedSample> out = t;
  std::sort(out.begin(), out.end(), [](const WeightedSample& a, const WeightedSample& b) {
    return a.sample.id < b.sample.id;
  });
  const long m = static_cast<long>(out.size());
  const long base = strategy.total / m;
  const long extra = strategy.total % m;
  for (long i = 0; i < m; ++i) out[i].copies = base + (i < extra ? 1 : 0);
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const WeightedSample& w) { return w.copies == 0; }),
            out.end());

  if (strategy.kind == UpsampleStrategy::Kind::RareThreshold) {
    // occurrences of each atom label across the multiset, copies included
    auto count_in = [](const WeightedSample& w, const AtomLabel& l) {
      long c = 0;
      if (w.sample.rich_label)
        for (const AtomLabel& a : w.sample.rich_label->graph.atoms)
          if (a == l) ++c;
      return c;
    };
    std::map<AtomLabel, long> occurrence;
    for (const WeightedSample& w : out)
      if (w.sample.rich_label)
        for (const AtomLabel& a : w.sample.rich_label->graph.atoms)
          occurrence[a] += w.copies;
    for (const auto& [label, initial] : occurrence) {
      long occ = initial;
      if (occ >= strategy.min_occurrences) continue;
      std::vector<std::size_t> havers;
      for (std::size_t i = 0; i < out.size(); ++i)
        if (count_in(out[i], label) > 0) havers.push_back(i);
      if (havers.empty()) continue;
      std::size_t rr = 0;
      while (occ < strategy.min_occurrences) {
        WeightedSample& w = out[havers[rr % havers.size()]];
        w.copies += 1;
        occ += count_in(w, label);
        ++rr;
      }
    }
  }
  return out;
}

struct LoopOptions {
  EditBudget budget;
  TiePolicyKind policy = TiePolicyKind::Discard;
  std::uint64_t seed = 0;
  UpsampleStrategy upsample;
  int max_iterations = 10;
  double accuracy_delta = 0.001;  // convergence threshold on test accuracy
  int threads = 1;
  bool replace_source = false;  // retrain on target rich labels only
};

using IterationCallback = std::function<void(const IterationReport&)>;

namespace detail {

// Test-set evaluation. A failed prediction is scored against a sentinel
// graph no truth can contain, so it simply counts as wrong.
inline void evaluate_into(Predictor& predictor, const std::vector<Sample>& test,
                          IterationReport& rep) {
  if (test.empty()) return;
  std::vector<PredictRequest> requests;
  requests.reserve(test.size());
  for (const Sample& s : test) requests.push_back({s.id, s.input_ref});
  auto predictions = predictor.predict(requests);
  std::vector<GraphPair> pairs;
  pairs.reserve(test.size());
  MolGraph sentinel;
  sentinel.atoms.push_back({"?missing?", 0});
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].normal_label)
      throw std::invalid_argument("test sample " + test[i].id + " has no normal label");
    pairs.emplace_back(predictions[i] ? predictions[i]->graph : sentinel,
                       *test[i].normal_label);
  }
  EvalResult ev = evaluate(pairs);
  rep.test_graph_accuracy = ev.graph_accuracy;
  for (const auto& [label, row] : ev.per_atom_type)
    rep.per_type_accuracy[label] = row.fraction();
  for (const auto& [label, row] : ev.per_bond_type)
    rep.per_type_accuracy["bond:" + label] = row.fraction();
}

}  // namespace detail

/// Algorithm main loop: every iteration re-aligns all targets from
/// scratch with the current model, upsamples the rich-labeled survivors,
/// retrains, and evaluates on the held-out set. Report 0 is the
/// pre-adaptation baseline. Stops at max_iterations or when the labeled
/// set size is stable and test accuracy moved less than accuracy_delta.
inline std::vector<IterationReport> run_loop(Predictor& predictor,
                                             const std::vector<Sample>& source,
                                             const std::vector<Sample>& targets,
                                             const std::vector<Sample>& test,
                                             const LoopOptions& options,
                                             const IterationCallback& on_iteration = {}) {
  if (targets.empty()) throw std::invalid_argument("empty target set");
  if (auto err = options.budget.validate()) throw std::invalid_argument(*err);
  for (const Sample& s : source)
    if (!s.rich_label)
      throw std::invalid_argument("source sample " + s.id + " has no rich label");

  std::vector<Sample> ordered = targets;
  std::sort(ordered.begin(), ordered.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i].id == ordered[i - 1].id)
      throw std::invalid_argument("duplicate target sample id " + ordered[i].id);

  std::vector<WeightedSample> source_rich;
  source_rich.reserve(source.size());
  for (const Sample& s : source) source_rich.push_back({s, 1});

  std::vector<IterationReport> reports;
  std::vector<WeightedSample> previous_rich;

  for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
    if (iteration > 0) {
      if (!previous_rich.empty()) {
        auto training = upsample(previous_rich, options.upsample);
        predictor.retrain(options.replace_source ? std::vector<WeightedSample>{}
                                                 : source_rich,
                          training);
      }
    }
    PassOutput pass = self_label_pass(predictor, ordered, options.budget, options.policy,
                                      seed_combine(options.seed, iteration),
                                      options.threads);
    pass.report.iteration = iteration;
    detail::evaluate_into(predictor, test, pass.report);
    reports.push_back(pass.report);
    if (on_iteration) on_iteration(reports.back());

    if (iteration > 0) {
      const IterationReport& prev = reports[reports.size() - 2];
      const IterationReport& cur = reports.back();
      if (cur.labeled_total() == prev.labeled_total() &&
          std::abs(cur.test_graph_accuracy - prev.test_graph_accuracy) <
              options.accuracy_delta)
        break;
    }
    previous_rich = std::move(pass.rich);
  }
  return reports;
}

}  // namespace graphalign

#endif
