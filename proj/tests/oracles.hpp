// Brute-force reference implementations used to check the library. These
// work on plain token vectors and dense matrices and never call into the
// code paths they verify.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Dense transition matrix: counts every consecutive token pair with a double
// loop over the alphabet, then divides by the row's outgoing total.
inline Matrix graph_weights(const std::vector<std::string>& tokens,
                            const std::vector<std::string>& alphabet) {
  const std::size_t n = alphabet.size();
  Matrix counts(n, std::vector<double>(n, 0.0));
  std::vector<double> outgoing(n, 0.0);
  for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
    std::size_t from = n;
    std::size_t to = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alphabet[i] == tokens[k]) from = i;
      if (alphabet[i] == tokens[k + 1]) to = i;
    }
    counts[from][to] += 1.0;
    outgoing[from] += 1.0;
  }
  Matrix weights(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (outgoing[i] > 0.0) weights[i][j] = counts[i][j] / outgoing[i];
    }
  }
  return weights;
}

inline double score_full(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sum += std::abs(a[i][j] - b[i][j]);
    }
  }
  return (1.0 / (static_cast<double>(n) * static_cast<double>(n))) *
         (sum * sum);
}

inline double score_filtered(
    const Matrix& a, const Matrix& b,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  double sum = 0.0;
  for (const auto& [i, j] : edges) {
    sum += std::abs(a[i][j] - b[i][j]);
  }
  const double k = static_cast<double>(edges.size());
  return (1.0 / (k * k)) * (sum * sum);
}

struct Scatter {
  double within = 0.0;
  double between = 0.0;
  double mean_malware = 0.0;
  double mean_benign = 0.0;
  double mean_overall = 0.0;
};

// Direct evaluation of the scatter formulas from the two class value lists.
inline Scatter scatter(const std::vector<double>& malware,
                       const std::vector<double>& benign,
                       bool empirical_priors = false) {
  Scatter result;
  for (double x : malware) result.mean_malware += x;
  result.mean_malware /= static_cast<double>(malware.size());
  for (double x : benign) result.mean_benign += x;
  result.mean_benign /= static_cast<double>(benign.size());

  double scatter_malware = 0.0;
  for (double x : malware) {
    scatter_malware += (x - result.mean_malware) * (x - result.mean_malware);
  }
  double scatter_benign = 0.0;
  for (double x : benign) {
    scatter_benign += (x - result.mean_benign) * (x - result.mean_benign);
  }

  const double n_malware = static_cast<double>(malware.size());
  const double n_benign = static_cast<double>(benign.size());
  const double p_malware =
      empirical_priors ? n_malware / (n_malware + n_benign) : 0.5;
  const double p_benign =
      empirical_priors ? n_benign / (n_malware + n_benign) : 0.5;
  result.within = p_malware * scatter_malware + p_benign * scatter_benign;

  result.mean_overall =
      (n_malware * result.mean_malware + n_benign * result.mean_benign) /
      (n_malware + n_benign);
  result.between =
      n_malware * (result.mean_malware - result.mean_overall) *
          (result.mean_malware - result.mean_overall) +
      n_benign * (result.mean_benign - result.mean_overall) *
          (result.mean_benign - result.mean_overall);
  return result;
}

// Rank key replicating the documented ordering: perfect separators first
// (by between-class scatter), finite ratios next, constant edges last.
struct RankKey {
  int tier = 0;
  double key = 0.0;
};

inline RankKey rank_key(const Scatter& s) {
  if (s.within > 0.0) return {1, (s.within + s.between) / s.within};
  if (s.between > 0.0) return {2, s.between};
  return {0, 0.0};
}

inline double total_accuracy(std::size_t tp, std::size_t fp, std::size_t tn,
                             std::size_t fn) {
  return static_cast<double>(tp + tn) / static_cast<double>(tp + fp + tn + fn);
}

inline double mean_fold_accuracy(double total,
                                 const std::vector<double>& family_tprs) {
  double sum = 0.0;
  for (double tpr : family_tprs) sum += tpr;
  return (total + sum / static_cast<double>(family_tprs.size())) / 2.0;
}

inline double mma(const std::vector<double>& accuracies) {
  double sum = 0.0;
  for (double value : accuracies) sum += value;
  return sum / static_cast<double>(accuracies.size());
}

// Threshold rule re-derived by enumeration, for cross-checking set_threshold
// on overlapping score sets.
inline double best_midpoint_cut(std::vector<double> intra,
                                std::vector<double> cross) {
  std::vector<double> merged;
  merged.insert(merged.end(), intra.begin(), intra.end());
  merged.insert(merged.end(), cross.begin(), cross.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  auto errors_at = [&](double t) {
    std::size_t errors = 0;
    for (double m : intra) {
      if (m >= t) ++errors;
    }
    for (double b : cross) {
      if (b < t) ++errors;
    }
    return errors;
  };

  double best = merged.front();
  std::size_t best_errors = errors_at(best);
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double candidate = (merged[k] + merged[k + 1]) / 2.0;
    const std::size_t errors = errors_at(candidate);
    if (errors < best_errors) {
      best_errors = errors;
      best = candidate;
    }
  }
  return best;
}

}  // namespace oracle
