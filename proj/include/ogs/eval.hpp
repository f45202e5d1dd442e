// Stratified k-fold cross-validation driver and the accuracy metrics
// reported per fold and per experiment.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ogs/corpus.hpp"
#include "ogs/detector.hpp"
#include "ogs/errors.hpp"

namespace ogs {

/// Malware is the positive class: tp = malware classified malware,
/// tn = benign classified benign.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  bool operator==(const ConfusionCounts&) const = default;
};

/// (tp + tn) / (tp + tn + fp + fn). Throws DivisionByZeroError when all
/// counts are zero.
double total_accuracy(const ConfusionCounts& counts);

/// (total_accuracy + mean of the per-family true-positive rates) / 2.
/// Throws EmptyFamilyMapError when no family is present.
double mean_fold_accuracy(double total_accuracy,
                          const std::map<std::string, double>& per_family_tpr);

/// Arithmetic mean of the per-fold accuracies. Throws EmptyListError.
double mma(std::span<const double> fold_accuracies);

struct FoldSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Stratified split: each class is shuffled with the seeded generator
/// (malware first, then benign) and cut into k near-equal parts; fold i
/// tests on part i and trains on the rest. Index lists come back in
/// ascending order. Deterministic given the seed. Throws
/// InsufficientSamplesError when a class has fewer than k samples.
std::vector<FoldSplit> kfold_split(std::span<const LabeledSample> samples,
                                   std::size_t k, std::uint64_t seed);

struct SampleVerdict {
  std::string source_id;
  Label truth = Label::Benign;
  std::string family;
  double aggregate_score = 0.0;
  Label predicted = Label::Benign;
};

struct FoldResult {
  std::size_t fold_index = 0;
  ConfusionCounts counts;
  double total_accuracy = 0.0;
  /// Detection rate of the test malware per family category; empty when the
  /// fold has no categorized malware.
  std::map<std::string, double> per_family_tpr;
  /// (total + mean family TPR) / 2 when categories are present, otherwise
  /// equal to total_accuracy.
  double mean_fold_accuracy = 0.0;
  double threshold = 0.0;
  bool separable = false;
  std::size_t selected_edge_count = 0;
  std::vector<SampleVerdict> verdicts;  // per-sample outcomes, test order
};

struct ExperimentConfig {
  std::size_t folds = 5;
  std::size_t top_k = 50;
  std::uint64_t seed = 42;
  Aggregation aggregation = Aggregation::Mean;
  bool prune = true;
};

struct EvalReport {
  ExperimentConfig config;
  std::vector<FoldResult> folds;
  double mma = 0.0;
};

/// Thrown when one fold of an experiment fails; the message carries the
/// fold index and the underlying error.
class FoldError : public Error {
 public:
  FoldError(std::size_t fold_index, const std::string& message)
      : Error("fold " + std::to_string(fold_index) + ": " + message),
        fold_index_(fold_index) {}

  std::size_t fold_index() const { return fold_index_; }

 private:
  std::size_t fold_index_;
};

/// Runs k-fold cross-validation: per fold, trains on the training part and
/// predicts every test sample.
EvalReport run_experiment(std::span<const LabeledSample> samples,
                          const ExperimentConfig& config);

/// The configured (pruned) pass plus the all-edges baseline, on identical
/// fold partitions.
struct ComparisonReport {
  EvalReport pruned;
  EvalReport unpruned;
};

ComparisonReport run_comparison(std::span<const LabeledSample> samples,
                                const ExperimentConfig& config);

/// Stable JSON rendering: lexicographic keys, deterministic float printing,
/// verdict arrays in test order. Two identical runs give identical bytes.
std::string report_to_json(const EvalReport& report);
std::string comparison_to_json(const ComparisonReport& report);

/// CSV of (pass, fold, sample_id, label, aggregate_score, verdict).
void write_scores_csv(std::ostream& out, const EvalReport& report,
                      std::string_view pass_name);
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace ogs
