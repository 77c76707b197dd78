// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_SAMPLE_HPP
#define GRAPHALIGN_SAMPLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "graphalign/graph.hpp"

namespace graphalign {

/// One dataset record. input_ref is an opaque handle to whatever the
/// predictor consumes (a file path for the protocol, a lookup key for
/// the builtin predictor); labels are optional because source data has
/// rich ones and target data only normal ones.
struct Sample {
  std::string id;
  std::string input_ref;
  std::optional<MolGraph> normal_label;
  std::optional<PlanarEmbedding> rich_label;
};

/// Multiset entry; upsampling raises copies rather than materializing
/// duplicates.
struct WeightedSample {
  Sample sample;
  long copies = 1;
};

struct PredictRequest {
  std::string id;
  std::string input_ref;
};

struct ScoreRequest {
  std::string id;  // unique per request, e.g. "<sample>#<k>" for tie candidates
  std::string input_ref;
  PlanarEmbedding candidate;
};

/// The model f: U → V behind the loop. Calls are batched so a
/// file-protocol implementation costs one process invocation per phase.
/// predict reports per-sample failures as nullopt; score and retrain
/// throw on failures that invalidate the whole iteration.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<std::optional<PlanarEmbedding>> predict(
      const std::vector<PredictRequest>& requests) = 0;
  virtual std::vector<double> score(const std::vector<ScoreRequest>& requests) = 0;
  virtual void retrain(const std::vector<WeightedSample>& source_rich,
                       const std::vector<WeightedSample>& target_rich) = 0;
};

}  // namespace graphalign

#endif
