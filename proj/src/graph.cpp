#include "ogs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ogs/errors.hpp"

namespace ogs {

namespace {

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace

OpcodeAlphabet::OpcodeAlphabet(std::vector<std::string> opcodes)
    : opcodes_(std::move(opcodes)) {
  std::sort(opcodes_.begin(), opcodes_.end());
  opcodes_.erase(std::unique(opcodes_.begin(), opcodes_.end()),
                 opcodes_.end());
}

std::optional<std::size_t> OpcodeAlphabet::find(std::string_view token) const {
  auto it = std::lower_bound(opcodes_.begin(), opcodes_.end(), token);
  if (it == opcodes_.end() || *it != token) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - opcodes_.begin());
}

std::size_t OpcodeAlphabet::index_of(std::string_view token) const {
  auto index = find(token);
  if (!index) {
    throw UnknownOpcodeError(std::string(token));
  }
  return *index;
}

AlphabetPtr build_alphabet(std::span<const OpcodeSequence> sequences) {
  std::set<std::string> tokens;
  for (const OpcodeSequence& sequence : sequences) {
    tokens.insert(sequence.tokens.begin(), sequence.tokens.end());
  }
  if (tokens.empty()) {
    throw EmptyAlphabetError("no opcodes across all input sequences");
  }
  return std::make_shared<const OpcodeAlphabet>(
      std::vector<std::string>(tokens.begin(), tokens.end()));
}

EdgeFilter::EdgeFilter(AlphabetPtr alphabet, std::vector<IndexEdge> edges)
    : alphabet_(std::move(alphabet)), edges_(std::move(edges)) {
  if (!alphabet_) {
    throw Error("edge filter requires an alphabet");
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (const IndexEdge& edge : edges_) {
    if (edge.first >= alphabet_->size() || edge.second >= alphabet_->size()) {
      throw Error("edge filter index out of range");
    }
  }
}

EdgeFilter EdgeFilter::from_edges(AlphabetPtr alphabet,
                                  std::span<const Edge> edges) {
  std::vector<IndexEdge> indexed;
  indexed.reserve(edges.size());
  for (const Edge& edge : edges) {
    indexed.emplace_back(alphabet->index_of(edge.from),
                         alphabet->index_of(edge.to));
  }
  return EdgeFilter(std::move(alphabet), std::move(indexed));
}

bool EdgeFilter::contains(std::size_t from, std::size_t to) const {
  return std::binary_search(edges_.begin(), edges_.end(),
                            IndexEdge{from, to});
}

std::vector<Edge> EdgeFilter::to_edges() const {
  std::vector<Edge> result;
  result.reserve(edges_.size());
  for (const IndexEdge& edge : edges_) {
    result.push_back(
        {alphabet_->opcode(edge.first), alphabet_->opcode(edge.second)});
  }
  return result;
}

bool EdgeFilter::operator==(const EdgeFilter& other) const {
  return same_alphabet(alphabet_, other.alphabet_) && edges_ == other.edges_;
}

OpcodeGraph::OpcodeGraph(AlphabetPtr alphabet,
                         std::vector<std::vector<Entry>> rows,
                         std::string source_id)
    : alphabet_(std::move(alphabet)),
      rows_(std::move(rows)),
      source_id_(std::move(source_id)) {
  if (!alphabet_ || rows_.size() != alphabet_->size()) {
    throw Error("graph row count must match the alphabet size");
  }
}

double OpcodeGraph::weight(std::size_t from, std::size_t to) const {
  const std::vector<Entry>& row = rows_[from];
  auto it = std::lower_bound(
      row.begin(), row.end(), to,
      [](const Entry& entry, std::size_t column) { return entry.first < column; });
  if (it == row.end() || it->first != to) {
    return 0.0;
  }
  return it->second;
}

std::size_t OpcodeGraph::edge_count() const {
  std::size_t count = 0;
  for (const auto& row : rows_) count += row.size();
  return count;
}

OpcodeGraph OpcodeGraph::restricted_to(const EdgeFilter& filter) const {
  if (!same_alphabet(alphabet_, filter.alphabet())) {
    throw AlphabetMismatchError("edge filter built over a different alphabet");
  }
  std::vector<std::vector<Entry>> rows(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const Entry& entry : rows_[i]) {
      if (filter.contains(i, entry.first)) {
        rows[i].push_back(entry);
      }
    }
  }
  return OpcodeGraph(alphabet_, std::move(rows), source_id_);
}

bool OpcodeGraph::operator==(const OpcodeGraph& other) const {
  return same_alphabet(alphabet_, other.alphabet_) && rows_ == other.rows_ &&
         source_id_ == other.source_id_;
}

OpcodeGraph build_graph(const OpcodeSequence& sequence, AlphabetPtr alphabet) {
  const std::size_t n = alphabet->size();

  std::vector<std::size_t> indices;
  indices.reserve(sequence.tokens.size());
  for (const std::string& token : sequence.tokens) {
    indices.push_back(alphabet->index_of(token));
  }

  std::vector<std::map<std::size_t, std::size_t>> counts(n);
  std::vector<std::size_t> outgoing(n, 0);
  for (std::size_t k = 0; k + 1 < indices.size(); ++k) {
    ++counts[indices[k]][indices[k + 1]];
    ++outgoing[indices[k]];
  }

  std::vector<std::vector<OpcodeGraph::Entry>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].reserve(counts[i].size());
    for (const auto& [column, count] : counts[i]) {
      rows[i].emplace_back(column, static_cast<double>(count) /
                                       static_cast<double>(outgoing[i]));
    }
  }
  return OpcodeGraph(std::move(alphabet), std::move(rows),
                     sequence.source_id);
}

double score(const OpcodeGraph& a, const OpcodeGraph& b,
             const EdgeFilter* filter) {
  if (!same_alphabet(a.alphabet(), b.alphabet())) {
    throw AlphabetMismatchError("graphs were built over different alphabets");
  }

  if (filter != nullptr) {
    if (!same_alphabet(filter->alphabet(), a.alphabet())) {
      throw AlphabetMismatchError(
          "edge filter built over a different alphabet");
    }
    if (filter->empty()) {
      throw EmptyFilterError("edge filter must not be empty");
    }
    double sum = 0.0;
    for (const IndexEdge& edge : filter->edges()) {
      sum += std::abs(a.weight(edge.first, edge.second) -
                      b.weight(edge.first, edge.second));
    }
    const double k = static_cast<double>(filter->size());
    return (sum * sum) / (k * k);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    const auto& row_a = a.row(i);
    const auto& row_b = b.row(i);
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia < row_a.size() && ib < row_b.size()) {
      if (row_a[ia].first < row_b[ib].first) {
        sum += std::abs(row_a[ia++].second);
      } else if (row_b[ib].first < row_a[ia].first) {
        sum += std::abs(row_b[ib++].second);
      } else {
        sum += std::abs(row_a[ia++].second - row_b[ib++].second);
      }
    }
    for (; ia < row_a.size(); ++ia) sum += std::abs(row_a[ia].second);
    for (; ib < row_b.size(); ++ib) sum += std::abs(row_b[ib].second);
  }
  const double n = static_cast<double>(a.node_count());
  return (sum * sum) / (n * n);
}

}  // namespace ogs
