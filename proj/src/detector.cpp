#include "ogs/detector.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ogs/errors.hpp"

#include "json.hpp"

namespace ogs {

namespace {

using nlohmann::json;

std::string format_weight(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double parse_weight(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + text.size() || text.empty()) {
    throw SchemaError(where + ": not a decimal number: \"" + text + "\"");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw SchemaError(where + ": weight outside [0, 1]: \"" + text + "\"");
  }
  return value;
}

const json& require_field(const json& object, const char* key,
                          const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw SchemaError(where + ": missing field \"" + key + "\"");
  }
  return *it;
}

std::size_t count_errors(const std::vector<double>& intra,
                         const std::vector<double>& cross, double threshold) {
  // Malware pairs belong strictly under the threshold, benign comparisons
  // at or above it.
  std::size_t errors = 0;
  for (double value : intra) {
    if (value >= threshold) ++errors;
  }
  for (double value : cross) {
    if (value < threshold) ++errors;
  }
  return errors;
}

}  // namespace

std::string_view aggregation_name(Aggregation aggregation) {
  return aggregation == Aggregation::Mean ? "mean" : "max";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "mean") return Aggregation::Mean;
  if (name == "max") return Aggregation::Max;
  throw SchemaError("aggregation: expected \"mean\" or \"max\", got \"" +
                    std::string(name) + "\"");
}

ThresholdResult set_threshold(std::span<const OpcodeGraph> malware_graphs,
                              std::span<const OpcodeGraph> benign_graphs,
                              const EdgeFilter* edges) {
  if (malware_graphs.size() < 2) {
    throw DegenerateTrainingError(
        "threshold requires at least two malware graphs");
  }
  if (benign_graphs.empty()) {
    throw DegenerateTrainingError("threshold requires a benign graph");
  }

  std::vector<double> intra;
  intra.reserve(malware_graphs.size() * (malware_graphs.size() - 1) / 2);
  for (std::size_t i = 0; i < malware_graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < malware_graphs.size(); ++j) {
      intra.push_back(score(malware_graphs[i], malware_graphs[j], edges));
    }
  }

  std::vector<double> cross;
  cross.reserve(benign_graphs.size() * malware_graphs.size());
  for (const OpcodeGraph& benign : benign_graphs) {
    for (const OpcodeGraph& malware : malware_graphs) {
      cross.push_back(score(benign, malware, edges));
    }
  }

  ThresholdResult result;
  result.max_intra_malware = *std::max_element(intra.begin(), intra.end());
  result.min_benign_vs_malware = *std::min_element(cross.begin(), cross.end());

  if (result.max_intra_malware < result.min_benign_vs_malware) {
    result.separable = true;
    result.threshold =
        (result.max_intra_malware + result.min_benign_vs_malware) / 2.0;
    return result;
  }

  // Overlapping ranges: pick the error-minimizing cut among the midpoints of
  // the merged sorted score list, lowest cut on ties.
  std::vector<double> merged;
  merged.reserve(intra.size() + cross.size());
  merged.insert(merged.end(), intra.begin(), intra.end());
  merged.insert(merged.end(), cross.begin(), cross.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  result.separable = false;
  result.threshold = merged.front();  // all scores equal: no midpoints exist
  std::size_t best_errors = count_errors(intra, cross, result.threshold);
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double candidate = (merged[k] + merged[k + 1]) / 2.0;
    const std::size_t errors = count_errors(intra, cross, candidate);
    if (errors < best_errors) {
      best_errors = errors;
      result.threshold = candidate;
    }
  }
  return result;
}

bool DetectorModel::operator==(const DetectorModel& other) const {
  const bool alphabet_equal =
      alphabet == other.alphabet ||
      (alphabet && other.alphabet && *alphabet == *other.alphabet);
  return alphabet_equal && selected_edges == other.selected_edges &&
         malware_graphs == other.malware_graphs &&
         threshold == other.threshold && top_k == other.top_k;
}

TrainResult train(std::span<const LabeledSample> samples,
                  const TrainOptions& options) {
  if (options.top_k == 0) {
    throw Error("top_k must be at least 1");
  }

  bool has_malware = false;
  bool has_benign = false;
  for (const LabeledSample& sample : samples) {
    (sample.label == Label::Malware ? has_malware : has_benign) = true;
  }
  if (!has_malware || !has_benign) {
    throw SingleClassCorpusError(
        "training corpus must contain both malware and benign samples");
  }

  std::vector<OpcodeSequence> sequences;
  sequences.reserve(samples.size());
  for (const LabeledSample& sample : samples) {
    sequences.push_back(sample.sequence);
  }
  AlphabetPtr alphabet = build_alphabet(sequences);

  std::vector<OpcodeGraph> graphs;
  std::vector<Label> labels;
  graphs.reserve(samples.size());
  labels.reserve(samples.size());
  for (const LabeledSample& sample : samples) {
    graphs.push_back(build_graph(sample.sequence, alphabet));
    labels.push_back(sample.label);
  }

  TrainResult result;
  result.model.alphabet = alphabet;
  result.model.top_k = options.top_k;

  if (options.prune) {
    EdgeFeatureTable table = extract_features(graphs, labels);
    ScatterStats stats = compute_scatter(table, options.scatter);
    EdgeRanking ranking = rank_edges(stats);
    EdgeFilter filter = select_top_edges(ranking, options.top_k);
    result.feature_edge_count = ranking.ranked.size();

    std::vector<OpcodeGraph> pruned_malware;
    std::vector<OpcodeGraph> pruned_benign;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      OpcodeGraph pruned = graphs[i].restricted_to(filter);
      (labels[i] == Label::Malware ? pruned_malware : pruned_benign)
          .push_back(std::move(pruned));
    }
    result.threshold_info =
        set_threshold(pruned_malware, pruned_benign, &filter);
    result.model.selected_edges = std::move(filter);
    result.model.malware_graphs = std::move(pruned_malware);
    result.ranking = std::move(ranking);
  } else {
    std::vector<OpcodeGraph> malware;
    std::vector<OpcodeGraph> benign;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      (labels[i] == Label::Malware ? malware : benign)
          .push_back(std::move(graphs[i]));
    }
    result.threshold_info = set_threshold(malware, benign, nullptr);
    result.model.malware_graphs = std::move(malware);
  }
  result.model.threshold = result.threshold_info.threshold;
  return result;
}

Verdict predict(const DetectorModel& model, const OpcodeSequence& sequence,
                Aggregation aggregation) {
  if (sequence.tokens.empty()) {
    throw EmptySequenceError("cannot classify an empty opcode sequence: " +
                             sequence.source_id);
  }

  OpcodeSequence known;
  known.source_id = sequence.source_id;
  std::size_t dropped = 0;
  for (const std::string& token : sequence.tokens) {
    if (model.alphabet->find(token)) {
      known.tokens.push_back(token);
    } else {
      ++dropped;
    }
  }

  const OpcodeGraph graph = build_graph(known, model.alphabet);
  const EdgeFilter* filter =
      model.selected_edges ? &*model.selected_edges : nullptr;

  Verdict verdict;
  verdict.unknown_opcodes_dropped = dropped;
  verdict.per_reference_scores.reserve(model.malware_graphs.size());
  for (const OpcodeGraph& reference : model.malware_graphs) {
    verdict.per_reference_scores.push_back(score(graph, reference, filter));
  }

  if (aggregation == Aggregation::Mean) {
    double sum = 0.0;
    for (double value : verdict.per_reference_scores) sum += value;
    verdict.aggregate_score =
        sum / static_cast<double>(verdict.per_reference_scores.size());
  } else {
    verdict.aggregate_score =
        *std::max_element(verdict.per_reference_scores.begin(),
                          verdict.per_reference_scores.end());
  }
  verdict.label = verdict.aggregate_score < model.threshold ? Label::Malware
                                                            : Label::Benign;
  return verdict;
}

std::string save_model(const DetectorModel& model) {
  json document;
  document["version"] = DetectorModel::kFormatVersion;
  document["top_k"] = model.top_k;
  document["threshold"] = model.threshold;
  document["pruned"] = model.selected_edges.has_value();
  document["alphabet"] = model.alphabet->opcodes();

  json selected = json::array();
  if (model.selected_edges) {
    for (const Edge& edge : model.selected_edges->to_edges()) {
      selected.push_back(json::array({edge.from, edge.to}));
    }
  }
  document["selected_edges"] = std::move(selected);

  json graphs = json::array();
  for (const OpcodeGraph& graph : model.malware_graphs) {
    json edges = json::array();
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
      for (const OpcodeGraph::Entry& entry : graph.row(i)) {
        edges.push_back(json::array({model.alphabet->opcode(i),
                                     model.alphabet->opcode(entry.first),
                                     format_weight(entry.second)}));
      }
    }
    json item;
    item["source_id"] = graph.source_id();
    item["edges"] = std::move(edges);
    graphs.push_back(std::move(item));
  }
  document["malware_graphs"] = std::move(graphs);

  return document.dump(2) + "\n";
}

DetectorModel load_model(std::string_view bytes) {
  json document;
  try {
    document = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("model: invalid JSON: ") + e.what());
  }
  if (!document.is_object()) {
    throw SchemaError("model: expected a JSON object");
  }

  const json& version = require_field(document, "version", "model");
  if (!version.is_number_integer()) {
    throw SchemaError("version: expected an integer");
  }
  if (version.get<int>() != DetectorModel::kFormatVersion) {
    throw FormatVersionMismatchError(
        "unsupported model format version " + version.dump() + ", expected " +
        std::to_string(DetectorModel::kFormatVersion));
  }

  const json& top_k = require_field(document, "top_k", "model");
  if (!top_k.is_number_unsigned() || top_k.get<std::size_t>() == 0) {
    throw SchemaError("top_k: expected a positive integer");
  }
  const json& threshold = require_field(document, "threshold", "model");
  if (!threshold.is_number() || threshold.get<double>() < 0.0) {
    throw SchemaError("threshold: expected a non-negative number");
  }
  const json& pruned = require_field(document, "pruned", "model");
  if (!pruned.is_boolean()) {
    throw SchemaError("pruned: expected a boolean");
  }

  const json& alphabet_field = require_field(document, "alphabet", "model");
  if (!alphabet_field.is_array() || alphabet_field.empty()) {
    throw SchemaError("alphabet: expected a non-empty array");
  }
  std::vector<std::string> opcodes;
  opcodes.reserve(alphabet_field.size());
  for (std::size_t i = 0; i < alphabet_field.size(); ++i) {
    if (!alphabet_field[i].is_string()) {
      throw SchemaError("alphabet[" + std::to_string(i) +
                        "]: expected a string");
    }
    opcodes.push_back(alphabet_field[i].get<std::string>());
    if (i > 0 && !(opcodes[i - 1] < opcodes[i])) {
      throw SchemaError("alphabet[" + std::to_string(i) +
                        "]: tokens must be strictly sorted");
    }
  }
  AlphabetPtr alphabet =
      std::make_shared<const OpcodeAlphabet>(std::move(opcodes));

  DetectorModel model;
  model.alphabet = alphabet;
  model.top_k = top_k.get<std::size_t>();
  model.threshold = threshold.get<double>();

  const json& selected = require_field(document, "selected_edges", "model");
  if (!selected.is_array()) {
    throw SchemaError("selected_edges: expected an array");
  }
  std::vector<IndexEdge> selected_pairs;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const std::string where = "selected_edges[" + std::to_string(i) + "]";
    const json& pair = selected[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
        !pair[1].is_string()) {
      throw SchemaError(where + ": expected [from, to] token strings");
    }
    auto from = alphabet->find(pair[0].get<std::string>());
    auto to = alphabet->find(pair[1].get<std::string>());
    if (!from || !to) {
      throw SchemaError(where + ": token not in alphabet");
    }
    selected_pairs.emplace_back(*from, *to);
  }
  if (pruned.get<bool>()) {
    if (selected_pairs.empty()) {
      throw SchemaError("selected_edges: pruned model must select edges");
    }
    EdgeFilter filter(alphabet, std::move(selected_pairs));
    if (filter.size() > model.top_k) {
      throw SchemaError("selected_edges: more edges than top_k");
    }
    model.selected_edges = std::move(filter);
  } else if (!selected_pairs.empty()) {
    throw SchemaError("selected_edges: unpruned model must not select edges");
  }

  const json& graphs = require_field(document, "malware_graphs", "model");
  if (!graphs.is_array() || graphs.empty()) {
    throw SchemaError("malware_graphs: expected a non-empty array");
  }
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const std::string graph_path = "malware_graphs[" + std::to_string(g) + "]";
    const json& item = graphs[g];
    if (!item.is_object()) {
      throw SchemaError(graph_path + ": expected an object");
    }
    const json& source_id = require_field(item, "source_id", graph_path);
    if (!source_id.is_string()) {
      throw SchemaError(graph_path + ".source_id: expected a string");
    }
    const json& edges = require_field(item, "edges", graph_path);
    if (!edges.is_array()) {
      throw SchemaError(graph_path + ".edges: expected an array");
    }

    std::vector<std::vector<OpcodeGraph::Entry>> rows(alphabet->size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string where =
          graph_path + ".edges[" + std::to_string(k) + "]";
      const json& triple = edges[k];
      if (!triple.is_array() || triple.size() != 3 || !triple[0].is_string() ||
          !triple[1].is_string() || !triple[2].is_string()) {
        throw SchemaError(where + ": expected [from, to, weight-string]");
      }
      auto from = alphabet->find(triple[0].get<std::string>());
      auto to = alphabet->find(triple[1].get<std::string>());
      if (!from || !to) {
        throw SchemaError(where + ": token not in alphabet");
      }
      if (model.selected_edges && !model.selected_edges->contains(*from, *to)) {
        throw SchemaError(where + ": edge outside the selected set");
      }
      rows[*from].emplace_back(*to,
                               parse_weight(triple[2].get<std::string>(), where));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::sort(rows[i].begin(), rows[i].end());
      for (std::size_t k = 0; k + 1 < rows[i].size(); ++k) {
        if (rows[i][k].first == rows[i][k + 1].first) {
          throw SchemaError(graph_path + ".edges: duplicate edge " +
                            alphabet->opcode(i) + " -> " +
                            alphabet->opcode(rows[i][k].first));
        }
      }
    }
    model.malware_graphs.emplace_back(alphabet, std::move(rows),
                                      source_id.get<std::string>());
  }
  return model;
}

void save_model_file(const std::filesystem::path& path,
                     const DetectorModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write model file: " + path.string());
  }
  out << save_model(model);
  if (!out) {
    throw IoError("write failure: " + path.string());
  }
}

DetectorModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure: " + path.string());
  }
  return load_model(buffer.str());
}

}  // namespace ogs
