#include "ogs/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ogs/errors.hpp"

#include "json.hpp"

namespace ogs {

namespace {

bool is_blank(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure: " + path.string());
  }
  return std::move(buffer).str();
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::Malware ? "malware" : "benign";
}

Label parse_label(std::string_view name) {
  if (name == "malware") return Label::Malware;
  if (name == "benign") return Label::Benign;
  throw SchemaError("label: expected \"malware\" or \"benign\", got \"" +
                    std::string(name) + "\"");
}

OpcodeSequence parse_opcode_file(std::string_view raw_text,
                                 std::string source_id) {
  OpcodeSequence sequence;
  sequence.source_id = std::move(source_id);

  std::size_t pos = 0;
  while (pos <= raw_text.size()) {
    std::size_t eol = raw_text.find('\n', pos);
    std::string_view line = raw_text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos
                                           : eol - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }

    std::size_t start = 0;
    while (start < line.size() && is_blank(line[start])) ++start;
    if (start < line.size() && line[start] != '#') {
      std::size_t end = start;
      while (end < line.size() && !is_blank(line[end])) ++end;
      std::string token(line.substr(start, end - start));
      for (char& c : token) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      sequence.tokens.push_back(std::move(token));
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }

  if (sequence.tokens.empty()) {
    throw EmptySequenceError("no opcodes in input: " + sequence.source_id);
  }
  return sequence;
}

CorpusManifest read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open manifest: " + manifest_path.string());
  }

  CorpusManifest manifest;
  manifest.root = manifest_path.parent_path();

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (!is_blank(c)) {
        blank = false;
        break;
      }
    }
    if (blank) continue;

    nlohmann::json object;
    try {
      object = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("manifest line " + std::to_string(line_number) +
                        ": invalid JSON: " + e.what());
    }
    if (!object.is_object()) {
      throw SchemaError("manifest line " + std::to_string(line_number) +
                        ": expected an object");
    }
    if (!object.contains("path") || !object["path"].is_string()) {
      throw SchemaError("manifest line " + std::to_string(line_number) +
                        ": missing string field \"path\"");
    }
    if (!object.contains("label") || !object["label"].is_string()) {
      throw SchemaError("manifest line " + std::to_string(line_number) +
                        ": missing string field \"label\"");
    }

    ManifestEntry entry;
    entry.path = object["path"].get<std::string>();
    try {
      entry.label = parse_label(object["label"].get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError("manifest line " + std::to_string(line_number) + ": " +
                        e.what());
    }
    if (object.contains("family")) {
      if (!object["family"].is_string()) {
        throw SchemaError("manifest line " + std::to_string(line_number) +
                          ": field \"family\" must be a string");
      }
      entry.family = object["family"].get<std::string>();
    }
    manifest.entries.push_back(std::move(entry));
  }
  if (in.bad()) {
    throw IoError("read failure: " + manifest_path.string());
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& manifest_path,
                    const CorpusManifest& manifest) {
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write manifest: " + manifest_path.string());
  }
  for (const ManifestEntry& entry : manifest.entries) {
    nlohmann::json object;
    object["path"] = entry.path;
    object["label"] = std::string(label_name(entry.label));
    if (!entry.family.empty()) {
      object["family"] = entry.family;
    }
    out << object.dump() << '\n';
  }
  if (!out) {
    throw IoError("write failure: " + manifest_path.string());
  }
}

LoadResult load_corpus(const CorpusManifest& manifest) {
  LoadResult result;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& entry = manifest.entries[i];
    std::filesystem::path path = entry.path;
    if (path.is_relative()) {
      path = manifest.root / path;
    }

    std::string text;
    try {
      text = read_text_file(path);
    } catch (const IoError& e) {
      result.issues.push_back({i, entry.path, e.what()});
      continue;
    }
    try {
      LabeledSample sample;
      sample.sequence = parse_opcode_file(text, entry.path);
      sample.label = entry.label;
      sample.family = entry.family;
      result.samples.push_back(std::move(sample));
    } catch (const EmptySequenceError& e) {
      result.issues.push_back({i, entry.path, e.what()});
    }
  }
  return result;
}

}  // namespace ogs
