#include "ogs/morphgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "ogs/errors.hpp"
#include "ogs/rng.hpp"

#include "json.hpp"

namespace ogs {

namespace {

using nlohmann::json;

// Stream tags for deriving sub-generators from the corpus seed.
constexpr std::uint64_t kChainTag = 0x636861696eULL;  // "chain"
constexpr std::uint64_t kWormTag = 0x776f726dULL;     // "worm"
constexpr std::uint64_t kFileTagBase = 0x66696c6500ULL;

constexpr std::size_t kMaxTransposedBlock = 8;
constexpr std::size_t kSnippetMin = 3;
constexpr std::size_t kSnippetMax = 10;

struct AliasLookup {
  // token -> (group index, position within group)
  std::map<std::string, std::pair<std::size_t, std::size_t>> positions;
};

AliasLookup build_alias_lookup(
    std::span<const std::vector<std::string>> groups) {
  AliasLookup lookup;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t m = 0; m < groups[g].size(); ++m) {
      lookup.positions.emplace(groups[g][m], std::make_pair(g, m));
    }
  }
  return lookup;
}

// First-order transition structure the benign sampler walks. Every opcode
// has a non-empty successor set, so sampling never stalls.
struct BenignChain {
  std::vector<std::string> opcodes;
  // rows[i] = (opcode index, cumulative weight), cumulative up to 1.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

BenignChain make_benign_chain(const BenignGeneratorParams& params, Rng& rng) {
  BenignChain chain;
  chain.opcodes =
      params.opcodes.empty() ? default_benign_opcodes() : params.opcodes;
  const std::size_t n = chain.opcodes.size();
  if (n == 0) {
    throw SchemaError("benign.opcodes: must not be empty");
  }
  const std::size_t lo = std::min(params.successors_min, n);
  const std::size_t hi = std::min(params.successors_max, n);
  if (lo == 0 || hi < lo) {
    throw SchemaError("benign.successors: invalid range");
  }

  chain.rows.resize(n);
  std::vector<std::size_t> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t support = lo + rng.below(hi - lo + 1);
    std::iota(candidates.begin(), candidates.end(), 0);
    rng.shuffle(candidates);
    candidates.resize(support);
    std::sort(candidates.begin(), candidates.end());

    std::vector<double> weights(support);
    double total = 0.0;
    for (double& w : weights) {
      w = rng.unit() + 0.05;
      total += w;
    }
    double cumulative = 0.0;
    for (std::size_t s = 0; s < support; ++s) {
      cumulative += weights[s] / total;
      chain.rows[i].emplace_back(candidates[s], cumulative);
    }
    chain.rows[i].back().second = 1.0;
    candidates.resize(n);
  }
  return chain;
}

std::vector<std::string> sample_benign_tokens(const BenignChain& chain,
                                              std::size_t length, Rng& rng) {
  std::vector<std::string> tokens;
  tokens.reserve(length);
  std::size_t current = rng.below(chain.opcodes.size());
  for (std::size_t k = 0; k < length; ++k) {
    tokens.push_back(chain.opcodes[current]);
    const double draw = rng.unit();
    const auto& row = chain.rows[current];
    std::size_t next = row.back().first;
    for (const auto& [candidate, cumulative] : row) {
      if (draw < cumulative) {
        next = candidate;
        break;
      }
    }
    current = next;
  }
  return tokens;
}

std::string format_ratio(double ratio) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", ratio);
  return buffer;
}

void require_kind(const json& value, bool ok, const std::string& field,
                  const char* expected) {
  if (!ok) {
    throw SchemaError(field + ": expected " + expected + ", got " +
                      value.dump());
  }
}

}  // namespace

const std::vector<std::vector<std::string>>& default_alias_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"jz", "je"},         {"jnz", "jne"},    {"shl", "sal"},
      {"imul", "mul"},      {"idiv", "div"},   {"lodsb", "lodsw"},
      {"stosb", "stosw"},   {"scasb", "scasw"}, {"insb", "insw"},
      {"outsb", "outsw"},   {"xlat", "xlatb"},
  };
  return groups;
}

const std::vector<std::string>& default_benign_opcodes() {
  static const std::vector<std::string> opcodes = {
      "add",  "and",  "call", "cmp",  "dec",  "idiv", "imul", "inc", "ja",
      "jbe",  "jle",  "jmp",  "jnz",  "jz",   "lea",  "mov",  "movzx",
      "nop",  "or",   "pop",  "push", "ret",  "shl",  "shr",  "sub",
      "test", "xor",
  };
  return opcodes;
}

const std::vector<std::string>& default_worm_opcodes() {
  static const std::vector<std::string> opcodes = {
      "bswap", "cmc",   "cpuid", "in",    "insb",  "lahf",  "lodsb", "out",
      "outsb", "rdtsc", "sahf",  "scasb", "sgdt",  "sidt",  "stosb", "xlat",
  };
  return opcodes;
}

MutationTrace mutate_traced(const OpcodeSequence& base,
                            const MorphConfig& config) {
  if (base.tokens.empty()) {
    throw EmptyBaseError("cannot mutate an empty base sequence");
  }
  if (config.padding_ratio < 0.0) {
    throw Error("padding_ratio must be non-negative");
  }
  if (config.substitution_rate < 0.0 || config.substitution_rate > 1.0) {
    throw Error("substitution_rate must lie in [0, 1]");
  }

  Rng rng(config.seed);
  const std::span<const std::vector<std::string>> groups =
      config.alias_groups.empty()
          ? std::span<const std::vector<std::string>>(default_alias_groups())
          : config.alias_groups;
  const AliasLookup aliases = build_alias_lookup(groups);

  std::vector<std::string> tokens = base.tokens;

  // 1. alias substitution, one independent draw per token
  for (std::string& token : tokens) {
    const double draw = rng.unit();
    if (draw >= config.substitution_rate) continue;
    auto hit = aliases.positions.find(token);
    if (hit == aliases.positions.end()) continue;
    const auto& group = groups[hit->second.first];
    if (group.size() < 2) continue;
    std::size_t pick = rng.below(group.size() - 1);
    if (pick >= hit->second.second) ++pick;  // skip the token itself
    token = group[pick];
  }

  // 2. adjacent-block swaps
  const std::size_t n = tokens.size();
  if (n >= 2) {
    for (std::size_t t = 0; t < config.block_transpositions; ++t) {
      const std::size_t start = rng.below(n - 1);
      const std::size_t max_first = std::min(kMaxTransposedBlock, n - 1 - start);
      const std::size_t first_len = 1 + rng.below(max_first);
      const std::size_t remaining = n - start - first_len;
      const std::size_t second_len =
          1 + rng.below(std::min(kMaxTransposedBlock, remaining));
      std::rotate(tokens.begin() + start, tokens.begin() + start + first_len,
                  tokens.begin() + start + first_len + second_len);
    }
  }

  MutationTrace trace;
  trace.inserted.assign(tokens.size(), false);

  // 3. dead-code insertion: contiguous benign snippets at random gaps until
  // the padding budget is spent exactly
  std::size_t budget = static_cast<std::size_t>(
      std::floor(config.padding_ratio * static_cast<double>(base.tokens.size())));
  if (budget > 0) {
    std::vector<const OpcodeSequence*> pool;
    for (const OpcodeSequence& candidate : config.benign_pool) {
      if (!candidate.tokens.empty()) pool.push_back(&candidate);
    }
    if (pool.empty()) {
      throw EmptyBenignPoolError(
          "dead-code insertion requires a non-empty benign pool");
    }

    while (budget > 0) {
      std::size_t length =
          kSnippetMin + rng.below(kSnippetMax - kSnippetMin + 1);
      length = std::min(length, budget);
      const OpcodeSequence& source = *pool[rng.below(pool.size())];
      length = std::min(length, source.tokens.size());
      const std::size_t start = rng.below(source.tokens.size() - length + 1);
      const std::size_t gap = rng.below(tokens.size() + 1);

      tokens.insert(tokens.begin() + gap, source.tokens.begin() + start,
                    source.tokens.begin() + start + length);
      trace.inserted.insert(trace.inserted.begin() + gap, length, true);
      budget -= length;
    }
  }

  trace.sequence.source_id = base.source_id;
  trace.sequence.tokens = std::move(tokens);
  return trace;
}

OpcodeSequence mutate(const OpcodeSequence& base, const MorphConfig& config) {
  return mutate_traced(base, config).sequence;
}

OpcodeSequence make_base_worm(const SyntheticCorpusSpec& spec) {
  OpcodeSequence worm;
  worm.source_id = "base_worm";
  if (!spec.base_worm_tokens.empty()) {
    worm.tokens = spec.base_worm_tokens;
    return worm;
  }
  if (spec.base_worm_length == 0 || spec.motif_length == 0) {
    throw SchemaError("base_worm: length and motif_length must be positive");
  }

  Rng rng(mix_seed(spec.seed, kWormTag));
  const std::vector<std::string>& worm_ops =
      spec.worm_opcodes.empty() ? default_worm_opcodes() : spec.worm_opcodes;
  const std::vector<std::string>& benign_ops =
      spec.benign.opcodes.empty() ? default_benign_opcodes()
                                  : spec.benign.opcodes;
  if (worm_ops.empty()) {
    throw SchemaError("worm_opcodes: must not be empty");
  }

  std::vector<std::string> motif;
  motif.reserve(spec.motif_length);
  for (std::size_t i = 0; i < spec.motif_length; ++i) {
    if (rng.unit() < spec.benign_token_share && !benign_ops.empty()) {
      motif.push_back(benign_ops[rng.below(benign_ops.size())]);
    } else {
      motif.push_back(worm_ops[rng.below(worm_ops.size())]);
    }
  }

  worm.tokens.reserve(spec.base_worm_length);
  for (std::size_t i = 0; i < spec.base_worm_length; ++i) {
    worm.tokens.push_back(motif[i % motif.size()]);
  }
  return worm;
}

std::vector<LabeledSample> generate_samples(const SyntheticCorpusSpec& spec) {
  if (spec.ratios.empty()) {
    throw SchemaError("ratios: must not be empty");
  }
  for (double ratio : spec.ratios) {
    if (ratio < 0.0) {
      throw SchemaError("ratios: entries must be non-negative");
    }
  }
  if (spec.variants_per_ratio == 0) {
    throw SchemaError("variants_per_ratio: must be positive");
  }
  if (spec.benign_count == 0) {
    throw SchemaError("benign_count: must be positive");
  }
  if (spec.benign.min_length == 0 ||
      spec.benign.max_length < spec.benign.min_length) {
    throw SchemaError("benign: invalid length range");
  }

  Rng chain_rng(mix_seed(spec.seed, kChainTag));
  const BenignChain chain = make_benign_chain(spec.benign, chain_rng);

  // Benign files come first: they double as the dead-code pool.
  std::uint64_t file_index = 0;
  std::vector<OpcodeSequence> benign_sequences;
  benign_sequences.reserve(spec.benign_count);
  for (std::size_t b = 0; b < spec.benign_count; ++b) {
    Rng rng(mix_seed(spec.seed, kFileTagBase + file_index++));
    const std::size_t length =
        spec.benign.min_length +
        rng.below(spec.benign.max_length - spec.benign.min_length + 1);
    OpcodeSequence sequence;
    char name[48];
    std::snprintf(name, sizeof(name), "benign_%04zu.ops", b);
    sequence.source_id = name;
    sequence.tokens = sample_benign_tokens(chain, length, rng);
    benign_sequences.push_back(std::move(sequence));
  }

  const OpcodeSequence base = make_base_worm(spec);

  std::vector<LabeledSample> samples;
  samples.reserve(spec.ratios.size() * spec.variants_per_ratio +
                  spec.benign_count);
  for (double ratio : spec.ratios) {
    const std::string family = "pad_" + format_ratio(ratio);
    for (std::size_t v = 0; v < spec.variants_per_ratio; ++v) {
      MorphConfig config;
      config.padding_ratio = ratio;
      config.substitution_rate = spec.substitution_rate;
      config.block_transpositions = spec.block_transpositions;
      config.seed = mix_seed(spec.seed, kFileTagBase + file_index++);
      config.benign_pool = benign_sequences;
      config.alias_groups = spec.alias_groups;

      LabeledSample sample;
      sample.sequence = mutate(base, config);
      char name[64];
      std::snprintf(name, sizeof(name), "mal_p%s_%04zu.ops", family.c_str() + 4,
                    v);
      sample.sequence.source_id = name;
      sample.label = Label::Malware;
      sample.family = family;
      samples.push_back(std::move(sample));
    }
  }

  for (OpcodeSequence& sequence : benign_sequences) {
    LabeledSample sample;
    sample.sequence = std::move(sequence);
    sample.label = Label::Benign;
    samples.push_back(std::move(sample));
  }
  return samples;
}

CorpusManifest generate_corpus(const SyntheticCorpusSpec& spec,
                               const std::filesystem::path& out_dir) {
  const std::vector<LabeledSample> samples = generate_samples(spec);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory: " + out_dir.string() +
                  ": " + ec.message());
  }

  CorpusManifest manifest;
  manifest.root = out_dir;
  for (const LabeledSample& sample : samples) {
    const std::filesystem::path path = out_dir / sample.sequence.source_id;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw IoError("cannot write corpus file: " + path.string());
    }
    for (const std::string& token : sample.sequence.tokens) {
      out << token << '\n';
    }
    if (!out) {
      throw IoError("write failure: " + path.string());
    }
    manifest.entries.push_back(
        {sample.sequence.source_id, sample.label, sample.family});
  }
  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

SyntheticCorpusSpec corpus_spec_from_json(std::string_view text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("spec: invalid JSON: ") + e.what());
  }
  if (!document.is_object()) {
    throw SchemaError("spec: expected a JSON object");
  }

  SyntheticCorpusSpec spec;
  static const std::set<std::string> known_keys = {
      "seed",           "base_worm_tokens",  "base_worm_length",
      "motif_length",   "benign_token_share", "ratios",
      "variants_per_ratio", "benign_count",  "benign",
      "substitution_rate", "block_transpositions", "alias_groups",
      "worm_opcodes",
  };
  for (const auto& [key, value] : document.items()) {
    if (!known_keys.count(key)) {
      throw SchemaError(key + ": unknown field");
    }
  }

  auto get_unsigned = [&](const char* key, std::size_t fallback) {
    if (!document.contains(key)) return fallback;
    const json& value = document[key];
    require_kind(value, value.is_number_unsigned(), key,
                 "a non-negative integer");
    return value.get<std::size_t>();
  };
  auto get_number = [&](const char* key, double fallback) {
    if (!document.contains(key)) return fallback;
    const json& value = document[key];
    require_kind(value, value.is_number(), key, "a number");
    return value.get<double>();
  };
  auto get_string_list = [&](const json& value, const std::string& field) {
    require_kind(value, value.is_array(), field, "an array of strings");
    std::vector<std::string> items;
    for (const json& item : value) {
      require_kind(item, item.is_string(), field, "an array of strings");
      items.push_back(item.get<std::string>());
    }
    return items;
  };

  spec.seed = get_unsigned("seed", spec.seed);
  spec.base_worm_length = get_unsigned("base_worm_length", spec.base_worm_length);
  spec.motif_length = get_unsigned("motif_length", spec.motif_length);
  spec.benign_token_share =
      get_number("benign_token_share", spec.benign_token_share);
  spec.variants_per_ratio =
      get_unsigned("variants_per_ratio", spec.variants_per_ratio);
  spec.benign_count = get_unsigned("benign_count", spec.benign_count);
  spec.substitution_rate =
      get_number("substitution_rate", spec.substitution_rate);
  spec.block_transpositions =
      get_unsigned("block_transpositions", spec.block_transpositions);

  if (!document.contains("ratios")) {
    throw SchemaError("ratios: required field is missing");
  }
  const json& ratios = document["ratios"];
  require_kind(ratios, ratios.is_array(), "ratios", "an array of numbers");
  for (const json& value : ratios) {
    require_kind(value, value.is_number(), "ratios", "an array of numbers");
    spec.ratios.push_back(value.get<double>());
  }
  if (spec.ratios.empty()) {
    throw SchemaError("ratios: must not be empty");
  }

  if (document.contains("base_worm_tokens")) {
    spec.base_worm_tokens =
        get_string_list(document["base_worm_tokens"], "base_worm_tokens");
  }
  if (document.contains("worm_opcodes")) {
    spec.worm_opcodes = get_string_list(document["worm_opcodes"], "worm_opcodes");
  }
  if (document.contains("alias_groups")) {
    const json& groups = document["alias_groups"];
    require_kind(groups, groups.is_array(), "alias_groups",
                 "an array of string arrays");
    for (const json& group : groups) {
      spec.alias_groups.push_back(get_string_list(group, "alias_groups"));
    }
  }
  if (document.contains("benign")) {
    const json& benign = document["benign"];
    require_kind(benign, benign.is_object(), "benign", "an object");
    for (const auto& [key, value] : benign.items()) {
      if (key == "min_length") {
        require_kind(value, value.is_number_unsigned(), "benign.min_length",
                     "a non-negative integer");
        spec.benign.min_length = value.get<std::size_t>();
      } else if (key == "max_length") {
        require_kind(value, value.is_number_unsigned(), "benign.max_length",
                     "a non-negative integer");
        spec.benign.max_length = value.get<std::size_t>();
      } else if (key == "opcodes") {
        spec.benign.opcodes = get_string_list(value, "benign.opcodes");
      } else if (key == "successors_min") {
        require_kind(value, value.is_number_unsigned(), "benign.successors_min",
                     "a non-negative integer");
        spec.benign.successors_min = value.get<std::size_t>();
      } else if (key == "successors_max") {
        require_kind(value, value.is_number_unsigned(), "benign.successors_max",
                     "a non-negative integer");
        spec.benign.successors_max = value.get<std::size_t>();
      } else {
        throw SchemaError("benign." + key + ": unknown field");
      }
    }
  }

  if (spec.substitution_rate < 0.0 || spec.substitution_rate > 1.0) {
    throw SchemaError("substitution_rate: must lie in [0, 1]");
  }
  if (spec.benign_token_share < 0.0 || spec.benign_token_share > 1.0) {
    throw SchemaError("benign_token_share: must lie in [0, 1]");
  }
  return spec;
}

}  // namespace ogs
