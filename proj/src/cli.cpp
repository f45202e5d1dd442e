#include "ogs/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "ogs/corpus.hpp"
#include "ogs/errors.hpp"
#include "ogs/morphgen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace ogs {

namespace {

using nlohmann::json;

std::string format_score(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_percent(double fraction) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.2f", fraction * 100.0);
  return buffer;
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

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failure: " + path.string());
  }
}

std::vector<std::string> json_value_to_inputs(const json& value) {
  std::vector<std::string> inputs;
  if (value.is_array()) {
    for (const json& item : value) {
      inputs.push_back(item.is_string() ? item.get<std::string>()
                                        : item.dump());
    }
  } else if (value.is_string()) {
    inputs.push_back(value.get<std::string>());
  } else {
    inputs.push_back(value.dump());  // numbers and booleans
  }
  return inputs;
}

// JSON config files: top-level keys address main-app options, one nested
// object per subcommand addresses its options by long name. Values given on
// the command line win over the file.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    return app_to_json(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json document;
    try {
      document = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConfigError(std::string("config file: invalid JSON: ") +
                             e.what());
    }
    if (!document.is_object()) {
      throw CLI::ConfigError("config file: expected a JSON object");
    }

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : document.items()) {
      if (value.is_object()) {
        for (const auto& [name, option_value] : value.items()) {
          CLI::ConfigItem item;
          item.parents = {key};
          item.name = name;
          item.inputs = json_value_to_inputs(option_value);
          items.push_back(std::move(item));
        }
      } else {
        CLI::ConfigItem item;
        item.name = key;
        item.inputs = json_value_to_inputs(value);
        items.push_back(std::move(item));
      }
    }
    return items;
  }

 private:
  static json app_to_json(const CLI::App* app, bool default_also) {
    json object = json::object();
    for (const CLI::Option* option : app->get_options({})) {
      if (!option->get_configurable() || option->get_lnames().empty()) {
        continue;
      }
      const std::string& name = option->get_lnames().front();
      if (option->count() > 0) {
        const auto results = option->reduced_results();
        if (results.size() == 1) {
          object[name] = results.front();
        } else {
          object[name] = results;
        }
      } else if (default_also) {
        object[name] = option->get_default_str();
      }
    }
    for (const CLI::App* sub :
         app->get_subcommands(std::function<bool(const CLI::App*)>{})) {
      json nested = app_to_json(sub, default_also);
      if (!nested.empty()) {
        object[sub->get_name()] = std::move(nested);
      }
    }
    return object;
  }
};

int report_io_error(const IoError& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return kExitIo;
}

int report_config_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return kExitConfig;
}

}  // namespace

int cmd_generate(const GenerateOptions& options, std::ostream& out,
                 std::ostream& err) {
  std::string text;
  try {
    text = read_text_file(options.spec_path);
  } catch (const IoError& e) {
    return report_io_error(e, err);
  }

  SyntheticCorpusSpec spec;
  try {
    spec = corpus_spec_from_json(text);
  } catch (const SchemaError& e) {
    return report_config_error(e, err);
  }

  try {
    const CorpusManifest manifest = generate_corpus(spec, options.out_dir);
    out << "manifest\t" << (options.out_dir / "manifest.jsonl").string()
        << '\n';
    out << "files\t" << manifest.entries.size() << '\n';
    return kExitOk;
  } catch (const IoError& e) {
    return report_io_error(e, err);
  } catch (const SchemaError& e) {
    return report_config_error(e, err);
  }
}

int cmd_train(const TrainCliOptions& options, std::ostream& out,
              std::ostream& err) {
  LoadResult loaded;
  try {
    const CorpusManifest manifest = read_manifest(options.manifest_path);
    loaded = load_corpus(manifest);
  } catch (const IoError& e) {
    return report_io_error(e, err);
  } catch (const SchemaError& e) {
    return report_config_error(e, err);
  }
  for (const LoadIssue& issue : loaded.issues) {
    err << "warning: skipped " << issue.source_id << ": " << issue.message
        << '\n';
  }

  TrainResult trained;
  try {
    TrainOptions train_options;
    train_options.top_k = options.top_k;
    train_options.prune = options.prune;
    trained = train(loaded.samples, train_options);
  } catch (const SingleClassCorpusError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTraining;
  } catch (const DegenerateTrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTraining;
  } catch (const EmptyAlphabetError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTraining;
  }

  try {
    save_model_file(options.model_path, trained.model);
    if (!options.ranking_csv_path.empty() && trained.ranking) {
      std::ofstream csv(options.ranking_csv_path, std::ios::binary);
      if (!csv) {
        throw IoError("cannot write ranking CSV: " +
                      options.ranking_csv_path.string());
      }
      write_ranking_csv(csv, *trained.ranking);
    }
  } catch (const IoError& e) {
    return report_io_error(e, err);
  }

  out << "threshold\t" << format_score(trained.model.threshold) << '\n';
  out << "selected_edges\t"
      << (trained.model.selected_edges ? trained.model.selected_edges->size()
                                       : 0)
      << '\n';
  out << "separable\t" << (trained.threshold_info.separable ? "true" : "false")
      << '\n';
  return kExitOk;
}

int cmd_score(const ScoreOptions& options, std::ostream& out,
              std::ostream& err) {
  DetectorModel model;
  try {
    model = load_model_file(options.model_path);
  } catch (const Error& e) {
    err << "error: cannot load model: " << e.what() << '\n';
    return kExitModelLoad;
  }

  for (const std::filesystem::path& path : options.inputs) {
    std::string text;
    try {
      text = read_text_file(path);
    } catch (const IoError& e) {
      err << "warning: skipped " << path.string() << ": " << e.what() << '\n';
      continue;
    }
    try {
      const OpcodeSequence sequence = parse_opcode_file(text, path.string());
      const Verdict verdict = predict(model, sequence, options.aggregation);
      out << path.string() << '\t' << label_name(verdict.label) << '\t'
          << format_score(verdict.aggregate_score) << '\n';
    } catch (const EmptySequenceError& e) {
      err << "warning: skipped " << path.string() << ": " << e.what() << '\n';
    }
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out,
                 std::ostream& err) {
  LoadResult loaded;
  try {
    const CorpusManifest manifest = read_manifest(options.manifest_path);
    loaded = load_corpus(manifest);
  } catch (const IoError& e) {
    return report_io_error(e, err);
  } catch (const SchemaError& e) {
    return report_config_error(e, err);
  }
  for (const LoadIssue& issue : loaded.issues) {
    err << "warning: skipped " << issue.source_id << ": " << issue.message
        << '\n';
  }

  ExperimentConfig config;
  config.folds = options.folds;
  config.top_k = options.top_k;
  config.seed = options.seed;
  config.aggregation = options.aggregation;
  config.prune = options.prune;

  std::string report_text;
  std::ostringstream csv;
  std::string summary;
  try {
    if (options.prune) {
      const ComparisonReport report = run_comparison(loaded.samples, config);
      report_text = comparison_to_json(report);
      write_comparison_csv(csv, report);
      summary = "mma_pruned_percent\t" + format_percent(report.pruned.mma) +
                "\nmma_unpruned_percent\t" +
                format_percent(report.unpruned.mma) + "\n";
    } else {
      const EvalReport report = run_experiment(loaded.samples, config);
      json wrapped;
      wrapped["unpruned"] = json::parse(report_to_json(report));
      report_text = wrapped.dump(2) + "\n";
      csv << "pass,fold,sample_id,label,aggregate_score,verdict\n";
      write_scores_csv(csv, report, "unpruned");
      summary = "mma_unpruned_percent\t" + format_percent(report.mma) + "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitTraining;
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) {
      throw IoError("cannot create output directory: " +
                    options.out_dir.string() + ": " + ec.message());
    }
    write_text_file(options.out_dir / "report.json", report_text);
    write_text_file(options.out_dir / "scores.csv", csv.str());
  } catch (const IoError& e) {
    return report_io_error(e, err);
  }

  out << summary;
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"opcode transition graph malware classifier"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "",
                 "JSON config file; command-line flags take precedence");

  GenerateOptions generate_options;
  CLI::App* generate =
      app.add_subcommand("generate", "write a synthetic corpus to disk");
  generate->add_option("--spec", generate_options.spec_path,
                       "generator spec JSON file")
      ->required();
  generate->add_option("--out", generate_options.out_dir, "output directory")
      ->required();

  TrainCliOptions train_options;
  bool train_no_prune = false;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a detector model from a manifest");
  train_cmd->add_option("--manifest", train_options.manifest_path,
                        "corpus manifest (JSON lines)")
      ->required();
  train_cmd->add_option("--model", train_options.model_path,
                        "output model path")
      ->required();
  train_cmd
      ->add_option("--top-edges", train_options.top_k,
                   "number of top-ranked edges to keep")
      ->default_val(std::size_t{50})
      ->check(CLI::PositiveNumber);
  train_cmd->add_flag("--no-prune", train_no_prune,
                      "skip edge selection and score over the full matrix");
  train_cmd->add_option("--ranking-csv", train_options.ranking_csv_path,
                        "dump the edge ranking as CSV");

  ScoreOptions score_options;
  std::string score_aggregation = "mean";
  CLI::App* score_cmd =
      app.add_subcommand("score", "classify opcode files with a model");
  score_cmd->add_option("--model", score_options.model_path, "model path")
      ->required();
  score_cmd
      ->add_option("--aggregation", score_aggregation,
                   "per-reference score aggregation")
      ->check(CLI::IsMember({"mean", "max"}));
  score_cmd
      ->add_option("files", score_options.inputs, "opcode files to classify")
      ->required();

  EvaluateOptions evaluate_options;
  std::string evaluate_aggregation = "mean";
  bool evaluate_no_prune = false;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "k-fold cross-validation with a baseline comparison");
  evaluate_cmd
      ->add_option("--manifest", evaluate_options.manifest_path,
                   "corpus manifest (JSON lines)")
      ->required();
  evaluate_cmd
      ->add_option("--out", evaluate_options.out_dir,
                   "directory for report.json and scores.csv")
      ->required();
  evaluate_cmd->add_option("--folds", evaluate_options.folds, "fold count")
      ->default_val(std::size_t{5})
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  evaluate_cmd
      ->add_option("--top-edges", evaluate_options.top_k,
                   "number of top-ranked edges to keep")
      ->default_val(std::size_t{50})
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--seed", evaluate_options.seed, "shuffle seed")
      ->default_val(std::uint64_t{42});
  evaluate_cmd
      ->add_option("--aggregation", evaluate_aggregation,
                   "per-reference score aggregation")
      ->check(CLI::IsMember({"mean", "max"}));
  evaluate_cmd->add_flag("--no-prune", evaluate_no_prune,
                         "run only the all-edges baseline pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (generate->parsed()) {
    return cmd_generate(generate_options, std::cout, std::cerr);
  }
  if (train_cmd->parsed()) {
    train_options.prune = !train_no_prune;
    return cmd_train(train_options, std::cout, std::cerr);
  }
  if (score_cmd->parsed()) {
    score_options.aggregation = parse_aggregation(score_aggregation);
    return cmd_score(score_options, std::cout, std::cerr);
  }
  if (evaluate_cmd->parsed()) {
    evaluate_options.aggregation = parse_aggregation(evaluate_aggregation);
    evaluate_options.prune = !evaluate_no_prune;
    return cmd_evaluate(evaluate_options, std::cout, std::cerr);
  }
  return kExitUsage;
}

}  // namespace ogs
