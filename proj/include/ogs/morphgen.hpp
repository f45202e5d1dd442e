// Synthetic metamorphic corpus generator: a base worm opcode sequence is
// mutated into variants by alias substitution, adjacent-block transposition
// and dead-code insertion from a benign pool, with the amount of dead code
// controlled by the padding ratio (dead opcodes per worm opcode).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ogs/corpus.hpp"

namespace ogs {

struct MorphConfig {
  /// Dead-code opcodes inserted per base opcode; the variant grows by
  /// exactly floor(padding_ratio * |base|) tokens.
  double padding_ratio = 0.0;
  /// Per-token probability of swapping an opcode for one of its aliases.
  double substitution_rate = 0.0;
  /// Number of random adjacent-block swaps applied to the core.
  std::size_t block_transpositions = 0;
  std::uint64_t seed = 0;
  /// Source of dead-code snippets; required when padding is requested.
  std::span<const OpcodeSequence> benign_pool;
  /// Substitution classes; empty means the built-in table.
  std::span<const std::vector<std::string>> alias_groups;
};

struct MutationTrace {
  OpcodeSequence sequence;
  /// Parallel to sequence.tokens; true where dead code was spliced in.
  /// Deleting the flagged positions recovers the substituted-and-transposed
  /// core exactly.
  std::vector<bool> inserted;
};

/// Built-in substitution classes of interchangeable mnemonics. The same
/// table ships as data/alias_groups.json for documentation; a unit test
/// keeps the two in sync.
const std::vector<std::vector<std::string>>& default_alias_groups();

/// Mnemonic pool the benign sampler draws from.
const std::vector<std::string>& default_benign_opcodes();

/// Mnemonics reserved for worm cores; disjoint from the benign pool.
const std::vector<std::string>& default_worm_opcodes();

/// Applies substitution, then transposition, then dead-code insertion.
/// Deterministic given config.seed. Throws EmptyBaseError on an empty base
/// and EmptyBenignPoolError when padding is requested without a pool.
OpcodeSequence mutate(const OpcodeSequence& base, const MorphConfig& config);

/// Same as mutate() but also reports which output positions are dead code.
MutationTrace mutate_traced(const OpcodeSequence& base,
                            const MorphConfig& config);

struct BenignGeneratorParams {
  std::size_t min_length = 150;
  std::size_t max_length = 600;
  /// Empty means default_benign_opcodes().
  std::vector<std::string> opcodes;
  /// Successor-set size range of the sampled transition structure.
  std::size_t successors_min = 2;
  std::size_t successors_max = 6;
};

struct SyntheticCorpusSpec {
  std::uint64_t seed = 42;
  /// Explicit worm core; empty means one is synthesized from the seed.
  std::vector<std::string> base_worm_tokens;
  std::size_t base_worm_length = 200;
  /// The synthesized core tiles a motif of this length, so its transition
  /// pairs repeat consistently across the core.
  std::size_t motif_length = 25;
  /// Share of benign-pool mnemonics mixed into the worm motif.
  double benign_token_share = 0.3;
  std::vector<double> ratios;
  std::size_t variants_per_ratio = 100;
  std::size_t benign_count = 20;
  BenignGeneratorParams benign;
  double substitution_rate = 0.1;
  std::size_t block_transpositions = 2;
  /// Empty means the built-in table.
  std::vector<std::vector<std::string>> alias_groups;
  /// Empty means default_worm_opcodes().
  std::vector<std::string> worm_opcodes;
};

/// Parses and validates a generator spec document; SchemaError messages name
/// the offending field.
SyntheticCorpusSpec corpus_spec_from_json(std::string_view text);

/// The worm core a spec describes, deterministic from spec.seed.
OpcodeSequence make_base_worm(const SyntheticCorpusSpec& spec);

/// Whole corpus in memory: malware variants (family "pad_<ratio>") in
/// ratio-major order, then the benign files. Every file's randomness comes
/// from its own generator seeded by mix_seed(spec.seed, file_index), so
/// output is independent of generation order.
std::vector<LabeledSample> generate_samples(const SyntheticCorpusSpec& spec);

/// Writes `.ops` files plus manifest.jsonl under out_dir and returns the
/// manifest. Throws IoError on write failures.
CorpusManifest generate_corpus(const SyntheticCorpusSpec& spec,
                               const std::filesystem::path& out_dir);

}  // namespace ogs
