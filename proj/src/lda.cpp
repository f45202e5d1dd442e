#include "ogs/lda.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "ogs/errors.hpp"

namespace ogs {

namespace {

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
  return a == b || (a && b && *a == *b);
}

// Sort tier: perfectly separating edges first, finite ratios next, constant
// edges last.
int ranking_tier(double within, double between) {
  if (within > 0.0) return 1;
  return between > 0.0 ? 2 : 0;
}

void append_formatted(std::string& out, double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  out += buffer;
}

}  // namespace

EdgeFeatureTable extract_features(std::span<const OpcodeGraph> graphs,
                                  std::span<const Label> labels) {
  if (graphs.size() != labels.size()) {
    throw Error("one label per graph required");
  }
  if (graphs.empty()) {
    throw Error("feature extraction requires at least one graph");
  }

  bool has_malware = false;
  bool has_benign = false;
  for (Label label : labels) {
    (label == Label::Malware ? has_malware : has_benign) = true;
  }
  if (!has_malware || !has_benign) {
    throw SingleClassCorpusError(
        "training corpus must contain both malware and benign samples");
  }

  const AlphabetPtr& alphabet = graphs.front().alphabet();
  for (const OpcodeGraph& graph : graphs) {
    if (!same_alphabet(graph.alphabet(), alphabet)) {
      throw AlphabetMismatchError("feature graphs must share one alphabet");
    }
  }

  std::set<IndexEdge> universe;
  for (const OpcodeGraph& graph : graphs) {
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
      for (const OpcodeGraph::Entry& entry : graph.row(i)) {
        universe.insert({i, entry.first});
      }
    }
  }

  EdgeFeatureTable table;
  table.alphabet = alphabet;
  table.edges.assign(universe.begin(), universe.end());
  table.labels.assign(labels.begin(), labels.end());
  table.values.reserve(graphs.size());
  for (const OpcodeGraph& graph : graphs) {
    std::vector<double> row;
    row.reserve(table.edges.size());
    for (const IndexEdge& edge : table.edges) {
      row.push_back(graph.weight(edge.first, edge.second));
    }
    table.values.push_back(std::move(row));
  }
  return table;
}

ScatterStats compute_scatter(const EdgeFeatureTable& table,
                             const ScatterOptions& options) {
  std::size_t n_malware = 0;
  std::size_t n_benign = 0;
  for (Label label : table.labels) {
    (label == Label::Malware ? n_malware : n_benign) += 1;
  }
  if (n_malware == 0 || n_benign == 0) {
    throw SingleClassCorpusError("scatter requires both classes");
  }

  const double total = static_cast<double>(n_malware + n_benign);
  const double prior_malware =
      options.empirical_priors ? static_cast<double>(n_malware) / total : 0.5;
  const double prior_benign =
      options.empirical_priors ? static_cast<double>(n_benign) / total : 0.5;

  ScatterStats stats;
  stats.alphabet = table.alphabet;
  stats.edges = table.edges;
  stats.malware_count = n_malware;
  stats.benign_count = n_benign;
  stats.per_edge.resize(table.edges.size());

  for (std::size_t c = 0; c < table.edges.size(); ++c) {
    double sum_malware = 0.0;
    double sum_benign = 0.0;
    for (std::size_t r = 0; r < table.values.size(); ++r) {
      (table.labels[r] == Label::Malware ? sum_malware : sum_benign) +=
          table.values[r][c];
    }
    const double mean_malware = sum_malware / static_cast<double>(n_malware);
    const double mean_benign = sum_benign / static_cast<double>(n_benign);

    double class_scatter_malware = 0.0;
    double class_scatter_benign = 0.0;
    for (std::size_t r = 0; r < table.values.size(); ++r) {
      if (table.labels[r] == Label::Malware) {
        const double d = table.values[r][c] - mean_malware;
        class_scatter_malware += d * d;
      } else {
        const double d = table.values[r][c] - mean_benign;
        class_scatter_benign += d * d;
      }
    }

    const double mean_overall = (static_cast<double>(n_malware) * mean_malware +
                                 static_cast<double>(n_benign) * mean_benign) /
                                total;
    const double dm = mean_malware - mean_overall;
    const double db = mean_benign - mean_overall;

    EdgeScatter& edge = stats.per_edge[c];
    edge.within = prior_malware * class_scatter_malware +
                  prior_benign * class_scatter_benign;
    edge.between = static_cast<double>(n_malware) * dm * dm +
                   static_cast<double>(n_benign) * db * db;
    edge.mean_malware = mean_malware;
    edge.mean_benign = mean_benign;
    edge.mean_overall = mean_overall;
  }
  return stats;
}

EdgeRanking rank_edges(const ScatterStats& stats) {
  EdgeRanking ranking;
  ranking.alphabet = stats.alphabet;
  ranking.ranked.reserve(stats.edges.size());
  for (std::size_t c = 0; c < stats.edges.size(); ++c) {
    const EdgeScatter& edge = stats.per_edge[c];
    RankedEdge ranked;
    ranked.edge = stats.edges[c];
    ranked.within = edge.within;
    ranked.between = edge.between;
    if (edge.within > 0.0) {
      ranked.r_value = (edge.within + edge.between) / edge.within;
    } else if (edge.between > 0.0) {
      ranked.r_value = std::numeric_limits<double>::infinity();
    } else {
      ranked.r_value = 0.0;
    }
    ranking.ranked.push_back(ranked);
  }

  std::sort(ranking.ranked.begin(), ranking.ranked.end(),
            [](const RankedEdge& a, const RankedEdge& b) {
              const int tier_a = ranking_tier(a.within, a.between);
              const int tier_b = ranking_tier(b.within, b.between);
              if (tier_a != tier_b) return tier_a > tier_b;
              // Perfect separators order by between-class scatter, finite
              // ones by the ratio itself.
              const double key_a = tier_a == 2 ? a.between : a.r_value;
              const double key_b = tier_b == 2 ? b.between : b.r_value;
              if (key_a != key_b) return key_a > key_b;
              return a.edge < b.edge;
            });
  return ranking;
}

EdgeFilter select_top_edges(const EdgeRanking& ranking, std::size_t top_k) {
  if (top_k == 0) {
    throw Error("top_k must be at least 1");
  }
  const std::size_t take = std::min(top_k, ranking.ranked.size());
  std::vector<IndexEdge> edges;
  edges.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    edges.push_back(ranking.ranked[i].edge);
  }
  return EdgeFilter(ranking.alphabet, std::move(edges));
}

void write_ranking_csv(std::ostream& out, const EdgeRanking& ranking) {
  out << "from,to,s_w,s_b,r_value\n";
  for (const RankedEdge& edge : ranking.ranked) {
    std::string line;
    line += ranking.alphabet->opcode(edge.edge.first);
    line += ',';
    line += ranking.alphabet->opcode(edge.edge.second);
    line += ',';
    append_formatted(line, edge.within);
    line += ',';
    append_formatted(line, edge.between);
    line += ',';
    append_formatted(line, edge.r_value);
    line += '\n';
    out << line;
  }
}

}  // namespace ogs
