// Command-line front end. The command entry points take explicit streams so
// tests can drive them in-process; run_cli() parses argv and dispatches.
//
// Exit codes: 0 success, 1 usage error, 2 invalid configuration,
// 3 I/O failure, 4 training/experiment failure, 5 model load failure.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ogs/detector.hpp"
#include "ogs/eval.hpp"

namespace ogs {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitTraining = 4,
  kExitModelLoad = 5,
};

struct GenerateOptions {
  std::filesystem::path spec_path;
  std::filesystem::path out_dir;
};

struct TrainCliOptions {
  std::filesystem::path manifest_path;
  std::filesystem::path model_path;
  std::size_t top_k = 50;
  bool prune = true;
  /// When set, the edge ranking is dumped here as CSV.
  std::filesystem::path ranking_csv_path;
};

struct ScoreOptions {
  std::filesystem::path model_path;
  std::vector<std::filesystem::path> inputs;
  Aggregation aggregation = Aggregation::Mean;
};

struct EvaluateOptions {
  std::filesystem::path manifest_path;
  std::filesystem::path out_dir;
  std::size_t folds = 5;
  std::size_t top_k = 50;
  std::uint64_t seed = 42;
  Aggregation aggregation = Aggregation::Mean;
  /// With pruning on, the run also includes the all-edges baseline pass;
  /// with pruning off only the baseline is run.
  bool prune = true;
};

int cmd_generate(const GenerateOptions& options, std::ostream& out,
                 std::ostream& err);
int cmd_train(const TrainCliOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_score(const ScoreOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out,
                 std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace ogs
