// Per-edge two-class scatter statistics and the discriminability ranking
// used to prune opcode graphs down to their most class-separating edges.
//
// Each edge is treated as one scalar feature: its weight per training graph.
// For edge e with class values D_malware and D_benign:
//   S_i      = sum over x in D_i of (x - m_i)^2          (unnormalized)
//   s_w      = P_malware * S_malware + P_benign * S_benign, P_k = 1/2
//   m        = (N_malware * m_malware + N_benign * m_benign) / N
//   s_b      = sum over classes of N_i * (m_i - m)^2
//   r        = (s_w + s_b) / s_w
// Higher r means the edge separates the classes better.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ogs/graph.hpp"

namespace ogs {

/// One row per training graph, one column per edge of the feature universe
/// (the sorted union of edges with nonzero weight in any training graph).
struct EdgeFeatureTable {
  AlphabetPtr alphabet;
  std::vector<IndexEdge> edges;
  std::vector<std::vector<double>> values;  // values[sample][edge]
  std::vector<Label> labels;                // one per sample
};

/// Builds the feature table from training graphs over a shared alphabet.
/// Throws SingleClassCorpusError unless both classes are present.
EdgeFeatureTable extract_features(std::span<const OpcodeGraph> graphs,
                                  std::span<const Label> labels);

struct EdgeScatter {
  double within = 0.0;   // s_w
  double between = 0.0;  // s_b
  double mean_malware = 0.0;
  double mean_benign = 0.0;
  double mean_overall = 0.0;
};

struct ScatterOptions {
  /// Class priors are fixed at 1/2 by default; set to weight S_i by the
  /// empirical class shares N_k/N instead.
  bool empirical_priors = false;
};

struct ScatterStats {
  AlphabetPtr alphabet;
  std::vector<IndexEdge> edges;
  std::vector<EdgeScatter> per_edge;  // parallel with `edges`
  std::size_t malware_count = 0;
  std::size_t benign_count = 0;
};

ScatterStats compute_scatter(const EdgeFeatureTable& table,
                             const ScatterOptions& options = {});

struct RankedEdge {
  IndexEdge edge;
  /// (s_w + s_b) / s_w. Perfectly separating edges (s_w = 0, s_b > 0) carry
  /// +infinity and sort above every finite value, by s_b descending;
  /// constant edges (s_w = s_b = 0) carry 0 and sort last.
  double r_value = 0.0;
  double within = 0.0;
  double between = 0.0;
};

/// Edges in descending discriminability order; ties break lexicographically
/// by (from, to).
struct EdgeRanking {
  AlphabetPtr alphabet;
  std::vector<RankedEdge> ranked;
};

EdgeRanking rank_edges(const ScatterStats& stats);

/// First min(top_k, |ranking|) edges as a filter. top_k must be positive.
EdgeFilter select_top_edges(const EdgeRanking& ranking, std::size_t top_k);

/// Diagnostic dump: from,to,s_w,s_b,r_value rows in rank order.
void write_ranking_csv(std::ostream& out, const EdgeRanking& ranking);

}  // namespace ogs
