// Opcode transition graphs and their pairwise dissimilarity score.
//
// A graph's weight matrix holds empirical transition probabilities over a
// canonical (lexicographically sorted) opcode alphabet. The dissimilarity of
// two graphs is the squared sum of absolute weight differences, divided by
// the squared number of summed cells: N^2 over the full matrix, K^2 when a
// K-edge filter restricts the sum.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ogs/corpus.hpp"

namespace ogs {

/// Directed opcode-to-opcode edge, by token.
struct Edge {
  std::string from;
  std::string to;

  auto operator<=>(const Edge&) const = default;
};

/// (row, column) pair into an alphabet-indexed weight matrix.
using IndexEdge = std::pair<std::size_t, std::size_t>;

/// Duplicate-free opcode universe in lexicographic order, so matrices built
/// over it are comparable across runs.
class OpcodeAlphabet {
 public:
  explicit OpcodeAlphabet(std::vector<std::string> opcodes);

  std::size_t size() const { return opcodes_.size(); }
  const std::vector<std::string>& opcodes() const { return opcodes_; }
  const std::string& opcode(std::size_t index) const { return opcodes_[index]; }

  std::optional<std::size_t> find(std::string_view token) const;

  /// Like find(), but throws UnknownOpcodeError when absent.
  std::size_t index_of(std::string_view token) const;

  bool operator==(const OpcodeAlphabet& other) const {
    return opcodes_ == other.opcodes_;
  }

 private:
  std::vector<std::string> opcodes_;  // sorted, unique
};

using AlphabetPtr = std::shared_ptr<const OpcodeAlphabet>;

/// Sorted union of all tokens across the input sequences.
/// Throws EmptyAlphabetError when every sequence is empty.
AlphabetPtr build_alphabet(std::span<const OpcodeSequence> sequences);

/// Duplicate-free set of matrix cells over one alphabet, kept in row-major
/// order so filtered sums are reproducible.
class EdgeFilter {
 public:
  EdgeFilter(AlphabetPtr alphabet, std::vector<IndexEdge> edges);

  /// Resolves token edges against the alphabet; throws UnknownOpcodeError.
  static EdgeFilter from_edges(AlphabetPtr alphabet, std::span<const Edge> edges);

  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  std::span<const IndexEdge> edges() const { return edges_; }
  const AlphabetPtr& alphabet() const { return alphabet_; }

  bool contains(std::size_t from, std::size_t to) const;

  /// Token form, in canonical order.
  std::vector<Edge> to_edges() const;

  bool operator==(const EdgeFilter& other) const;

 private:
  AlphabetPtr alphabet_;
  std::vector<IndexEdge> edges_;  // sorted, unique
};

/// Weighted directed graph over an opcode alphabet. Rows are stored sparsely
/// as sorted (column, weight) pairs. Rows produced by build_graph() sum to 1
/// or are empty; rows of pruned graphs may sum to less.
class OpcodeGraph {
 public:
  using Entry = std::pair<std::size_t, double>;

  OpcodeGraph(AlphabetPtr alphabet, std::vector<std::vector<Entry>> rows,
              std::string source_id);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  const std::string& source_id() const { return source_id_; }
  std::size_t node_count() const { return rows_.size(); }

  /// Weight of the (from, to) cell; 0 when the entry is absent.
  double weight(std::size_t from, std::size_t to) const;

  const std::vector<Entry>& row(std::size_t from) const { return rows_[from]; }

  /// Number of nonzero cells.
  std::size_t edge_count() const;

  /// Copy that keeps only the cells listed in `filter`. Weights are not
  /// re-normalized: filtered scoring reads the original probabilities.
  OpcodeGraph restricted_to(const EdgeFilter& filter) const;

  bool operator==(const OpcodeGraph& other) const;

 private:
  AlphabetPtr alphabet_;
  std::vector<std::vector<Entry>> rows_;
  std::string source_id_;
};

/// Empirical transition probabilities of `sequence` over `alphabet`:
/// weight[i][j] = count(i followed by j) / count(i followed by anything).
/// A sequence of length L contributes exactly L-1 transition counts.
/// Throws UnknownOpcodeError for tokens outside the alphabet.
OpcodeGraph build_graph(const OpcodeSequence& sequence, AlphabetPtr alphabet);

/// Dissimilarity of two graphs sharing one alphabet. With no filter the sum
/// runs over all N^2 cells and the result is (sum/N)^2-shaped:
/// (1/N^2) * (sum |a_ij - b_ij|)^2. With a K-edge filter the sum runs over
/// the filtered cells only and the normalizer becomes 1/K^2. Symmetric, zero
/// iff the compared entries are equal. Summation order is fixed (row-major)
/// for bit-reproducibility.
double score(const OpcodeGraph& a, const OpcodeGraph& b,
             const EdgeFilter* filter = nullptr);

}  // namespace ogs
