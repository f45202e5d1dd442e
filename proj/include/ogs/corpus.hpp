// Opcode-listing ingestion: `.ops` text files (one instruction per line)
// and JSON-lines corpus manifests.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ogs {

enum class Label { Malware, Benign };

std::string_view label_name(Label label);

/// Parses "malware" / "benign"; throws SchemaError on anything else.
Label parse_label(std::string_view name);

/// Ordered opcode tokens from one program. Tokens are lowercase, non-empty
/// and whitespace-free; file order is preserved exactly.
struct OpcodeSequence {
  std::string source_id;
  std::vector<std::string> tokens;

  bool operator==(const OpcodeSequence&) const = default;
};

struct LabeledSample {
  OpcodeSequence sequence;
  Label label = Label::Benign;
  std::string family;  // empty when the sample has no category
};

struct ManifestEntry {
  std::string path;
  Label label = Label::Benign;
  std::string family;
};

/// JSON-lines manifest, one {"path","label","family"} object per line.
/// Relative entry paths resolve against `root`.
struct CorpusManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

/// Normalizes one opcode listing: one token per non-empty, non-comment line,
/// truncated at the first whitespace run (operands dropped) and lowercased.
/// Lines whose first non-blank character is '#' are comments; LF and CRLF
/// are both accepted. Throws EmptySequenceError when nothing remains.
OpcodeSequence parse_opcode_file(std::string_view raw_text,
                                 std::string source_id);

/// Reads a manifest file; `root` is set to the manifest's directory.
/// Malformed lines raise SchemaError naming the line number.
CorpusManifest read_manifest(const std::filesystem::path& manifest_path);

/// Writes entries one JSON object per line, paths as given.
void write_manifest(const std::filesystem::path& manifest_path,
                    const CorpusManifest& manifest);

struct LoadIssue {
  std::size_t entry_index = 0;
  std::string source_id;
  std::string message;
};

/// Samples come back in manifest order. Entries that cannot be read or parse
/// empty are reported in `issues` and skipped; loading never fails fast.
struct LoadResult {
  std::vector<LabeledSample> samples;
  std::vector<LoadIssue> issues;
};

LoadResult load_corpus(const CorpusManifest& manifest);

}  // namespace ogs
