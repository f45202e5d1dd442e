#include "ogs/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "ogs/errors.hpp"
#include "ogs/rng.hpp"

#include "json.hpp"

namespace ogs {

namespace {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// Splits `indices` into k near-equal consecutive parts; the first
// (n mod k) parts carry one extra element.
std::vector<std::vector<std::size_t>> partition(
    const std::vector<std::size_t>& indices, std::size_t k) {
  std::vector<std::vector<std::size_t>> parts(k);
  const std::size_t base = indices.size() / k;
  const std::size_t remainder = indices.size() % k;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t size = base + (i < remainder ? 1 : 0);
    parts[i].assign(indices.begin() + offset, indices.begin() + offset + size);
    offset += size;
  }
  return parts;
}

json verdict_json(const SampleVerdict& verdict) {
  json object;
  object["source_id"] = verdict.source_id;
  object["label"] = std::string(label_name(verdict.truth));
  object["family"] = verdict.family;
  object["aggregate_score"] = verdict.aggregate_score;
  object["predicted"] = std::string(label_name(verdict.predicted));
  return object;
}

json report_json(const EvalReport& report) {
  json config;
  config["folds"] = report.config.folds;
  config["top_edges"] = report.config.top_k;
  config["seed"] = report.config.seed;
  config["aggregation"] = std::string(aggregation_name(report.config.aggregation));
  config["prune"] = report.config.prune;
  config["generator"] = "mt19937_64/fisher-yates";

  json folds = json::array();
  for (const FoldResult& fold : report.folds) {
    json counts;
    counts["tp"] = fold.counts.tp;
    counts["fp"] = fold.counts.fp;
    counts["tn"] = fold.counts.tn;
    counts["fn"] = fold.counts.fn;

    json fold_object;
    fold_object["fold_index"] = fold.fold_index;
    fold_object["counts"] = std::move(counts);
    fold_object["total_accuracy"] = fold.total_accuracy;
    fold_object["per_family_tpr"] = fold.per_family_tpr;
    fold_object["mean_fold_accuracy"] = fold.mean_fold_accuracy;
    fold_object["threshold"] = fold.threshold;
    fold_object["separable"] = fold.separable;
    fold_object["selected_edge_count"] = fold.selected_edge_count;
    json verdicts = json::array();
    for (const SampleVerdict& verdict : fold.verdicts) {
      verdicts.push_back(verdict_json(verdict));
    }
    fold_object["verdicts"] = std::move(verdicts);
    folds.push_back(std::move(fold_object));
  }

  json document;
  document["config"] = std::move(config);
  document["folds"] = std::move(folds);
  document["mma"] = report.mma;
  document["notes"]["mean_fold_accuracy"] =
      "(total_accuracy + mean per-family true-positive rate) / 2 when family "
      "categories are present; equal to total_accuracy otherwise";
  return document;
}

}  // namespace

double total_accuracy(const ConfusionCounts& counts) {
  if (counts.total() == 0) {
    throw DivisionByZeroError("no test samples to compute accuracy over");
  }
  return static_cast<double>(counts.tp + counts.tn) /
         static_cast<double>(counts.total());
}

double mean_fold_accuracy(double total_accuracy,
                          const std::map<std::string, double>& per_family_tpr) {
  if (per_family_tpr.empty()) {
    throw EmptyFamilyMapError("no family categories to average over");
  }
  double sum = 0.0;
  for (const auto& [family, tpr] : per_family_tpr) {
    sum += tpr;
  }
  const double mean_tpr = sum / static_cast<double>(per_family_tpr.size());
  return (total_accuracy + mean_tpr) / 2.0;
}

double mma(std::span<const double> fold_accuracies) {
  if (fold_accuracies.empty()) {
    throw EmptyListError("no fold accuracies to average");
  }
  double sum = 0.0;
  for (double accuracy : fold_accuracies) sum += accuracy;
  return sum / static_cast<double>(fold_accuracies.size());
}

std::vector<FoldSplit> kfold_split(std::span<const LabeledSample> samples,
                                   std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw Error("fold count must be at least 2");
  }

  std::vector<std::size_t> malware_indices;
  std::vector<std::size_t> benign_indices;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == Label::Malware ? malware_indices : benign_indices)
        .push_back(i);
  }
  if (malware_indices.size() < k) {
    throw InsufficientSamplesError("malware", malware_indices.size(), k);
  }
  if (benign_indices.size() < k) {
    throw InsufficientSamplesError("benign", benign_indices.size(), k);
  }

  Rng rng(seed);
  rng.shuffle(malware_indices);
  rng.shuffle(benign_indices);
  const auto malware_parts = partition(malware_indices, k);
  const auto benign_parts = partition(benign_indices, k);

  std::vector<FoldSplit> folds(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      auto& target = (j == i) ? folds[i].test_indices : folds[i].train_indices;
      target.insert(target.end(), malware_parts[j].begin(),
                    malware_parts[j].end());
      target.insert(target.end(), benign_parts[j].begin(),
                    benign_parts[j].end());
    }
    std::sort(folds[i].train_indices.begin(), folds[i].train_indices.end());
    std::sort(folds[i].test_indices.begin(), folds[i].test_indices.end());
  }
  return folds;
}

EvalReport run_experiment(std::span<const LabeledSample> samples,
                          const ExperimentConfig& config) {
  const std::vector<FoldSplit> splits =
      kfold_split(samples, config.folds, config.seed);

  EvalReport report;
  report.config = config;

  for (std::size_t fold_index = 0; fold_index < splits.size(); ++fold_index) {
    const FoldSplit& split = splits[fold_index];
    try {
      std::vector<LabeledSample> training;
      training.reserve(split.train_indices.size());
      for (std::size_t index : split.train_indices) {
        training.push_back(samples[index]);
      }

      TrainOptions options;
      options.top_k = config.top_k;
      options.prune = config.prune;
      const TrainResult trained = train(training, options);

      FoldResult fold;
      fold.fold_index = fold_index;
      fold.threshold = trained.model.threshold;
      fold.separable = trained.threshold_info.separable;
      fold.selected_edge_count = trained.model.selected_edges
                                     ? trained.model.selected_edges->size()
                                     : 0;

      std::map<std::string, std::pair<std::size_t, std::size_t>> family_counts;
      for (std::size_t index : split.test_indices) {
        const LabeledSample& sample = samples[index];
        const Verdict verdict =
            predict(trained.model, sample.sequence, config.aggregation);

        if (sample.label == Label::Malware) {
          (verdict.label == Label::Malware ? fold.counts.tp : fold.counts.fn) +=
              1;
          if (!sample.family.empty()) {
            auto& [detected, total] = family_counts[sample.family];
            if (verdict.label == Label::Malware) ++detected;
            ++total;
          }
        } else {
          (verdict.label == Label::Benign ? fold.counts.tn : fold.counts.fp) +=
              1;
        }
        fold.verdicts.push_back({sample.sequence.source_id, sample.label,
                                 sample.family, verdict.aggregate_score,
                                 verdict.label});
      }

      fold.total_accuracy = total_accuracy(fold.counts);
      for (const auto& [family, counts] : family_counts) {
        fold.per_family_tpr[family] = static_cast<double>(counts.first) /
                                      static_cast<double>(counts.second);
      }
      fold.mean_fold_accuracy =
          fold.per_family_tpr.empty()
              ? fold.total_accuracy
              : mean_fold_accuracy(fold.total_accuracy, fold.per_family_tpr);
      report.folds.push_back(std::move(fold));
    } catch (const Error& e) {
      throw FoldError(fold_index, e.what());
    }
  }

  std::vector<double> accuracies;
  accuracies.reserve(report.folds.size());
  for (const FoldResult& fold : report.folds) {
    accuracies.push_back(fold.mean_fold_accuracy);
  }
  report.mma = mma(accuracies);
  return report;
}

ComparisonReport run_comparison(std::span<const LabeledSample> samples,
                                const ExperimentConfig& config) {
  ComparisonReport report;
  ExperimentConfig pruned_config = config;
  pruned_config.prune = true;
  report.pruned = run_experiment(samples, pruned_config);

  ExperimentConfig baseline_config = config;
  baseline_config.prune = false;
  report.unpruned = run_experiment(samples, baseline_config);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonReport& report) {
  json document;
  document["pruned"] = report_json(report.pruned);
  document["unpruned"] = report_json(report.unpruned);
  return document.dump(2) + "\n";
}

void write_scores_csv(std::ostream& out, const EvalReport& report,
                      std::string_view pass_name) {
  for (const FoldResult& fold : report.folds) {
    for (const SampleVerdict& verdict : fold.verdicts) {
      out << pass_name << ',' << fold.fold_index << ',' << verdict.source_id
          << ',' << label_name(verdict.truth) << ','
          << format_double(verdict.aggregate_score) << ','
          << label_name(verdict.predicted) << '\n';
    }
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "pass,fold,sample_id,label,aggregate_score,verdict\n";
  write_scores_csv(out, report.pruned, "pruned");
  write_scores_csv(out, report.unpruned, "unpruned");
}

}  // namespace ogs
