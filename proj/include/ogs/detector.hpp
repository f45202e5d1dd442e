// Threshold classifier over opcode graphs: training prunes every graph to
// the top-ranked edges, picks a decision threshold from the training score
// distributions, and prediction compares an unseen sequence against every
// stored malware graph.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ogs/corpus.hpp"
#include "ogs/graph.hpp"
#include "ogs/lda.hpp"

namespace ogs {

/// How per-reference scores combine into one decision value.
enum class Aggregation { Mean, Max };

std::string_view aggregation_name(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view name);  // SchemaError on typo

struct ThresholdResult {
  double threshold = 0.0;
  /// True when the training score ranges do not overlap.
  bool separable = false;
  double max_intra_malware = 0.0;
  double min_benign_vs_malware = 0.0;
};

/// Decision threshold from training graphs. All malware-malware pairs and
/// all benign-vs-malware pairs are scored (filtered when `edges` is given).
/// When max(intra) < min(cross) the threshold is the midpoint of the gap;
/// otherwise it is the midpoint cut over the merged sorted score list that
/// misclassifies the fewest training pairs, lowest such cut on ties.
/// Throws DegenerateTrainingError with fewer than 2 malware or 1 benign
/// graphs.
ThresholdResult set_threshold(std::span<const OpcodeGraph> malware_graphs,
                              std::span<const OpcodeGraph> benign_graphs,
                              const EdgeFilter* edges);

struct DetectorModel {
  static constexpr int kFormatVersion = 1;

  AlphabetPtr alphabet;
  /// Absent on models trained with pruning disabled; those score over the
  /// full matrix.
  std::optional<EdgeFilter> selected_edges;
  /// Reference graphs, pruned to the selected edges when a filter is set.
  std::vector<OpcodeGraph> malware_graphs;
  double threshold = 0.0;
  std::size_t top_k = 0;

  bool operator==(const DetectorModel& other) const;
};

struct TrainOptions {
  std::size_t top_k = 50;
  bool prune = true;
  ScatterOptions scatter;
};

struct TrainResult {
  DetectorModel model;
  ThresholdResult threshold_info;
  /// Size of the ranked edge universe (0 when pruning was disabled).
  std::size_t feature_edge_count = 0;
  /// Full ranking, kept for diagnostics; absent when pruning was disabled.
  std::optional<EdgeRanking> ranking;
};

/// Full training pipeline: alphabet over all training sequences, graphs,
/// feature extraction, scatter, ranking, top-k selection, pruning and
/// thresholding. Propagates SingleClassCorpusError, EmptyAlphabetError and
/// DegenerateTrainingError.
TrainResult train(std::span<const LabeledSample> samples,
                  const TrainOptions& options = {});

struct Verdict {
  Label label = Label::Benign;
  double aggregate_score = 0.0;
  std::vector<double> per_reference_scores;
  /// Tokens dropped because the model alphabet does not contain them.
  std::size_t unknown_opcodes_dropped = 0;
};

/// Scores `sequence` against every stored malware graph and labels it
/// malware iff the aggregate lies strictly under the threshold (a tie is
/// benign). Tokens unknown to the model alphabet are dropped first, their
/// neighbors becoming adjacent. Throws EmptySequenceError on empty input.
Verdict predict(const DetectorModel& model, const OpcodeSequence& sequence,
                Aggregation aggregation = Aggregation::Mean);

/// Versioned JSON document with lexicographic key order. Weights travel as
/// decimal strings with 17 significant digits, so load(save(m)) reproduces
/// every double bit-for-bit.
std::string save_model(const DetectorModel& model);

/// Throws FormatVersionMismatchError on an unknown version and SchemaError
/// (naming the field path) on structural problems.
DetectorModel load_model(std::string_view bytes);

void save_model_file(const std::filesystem::path& path,
                     const DetectorModel& model);
DetectorModel load_model_file(const std::filesystem::path& path);

}  // namespace ogs
