#pragma once

// Experiment configuration (JSON) and the pieces of a run: model
// construction, dataset loading, and the train/eval/gen drivers used by the CLI.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sidnn/cells.hpp"
#include "sidnn/data.hpp"
#include "sidnn/hammerstein.hpp"
#include "sidnn/metrics.hpp"
#include "sidnn/training.hpp"

namespace sidnn {

struct LayerSpec {
  std::string type;  // dense | rnn | lstm | fastlstm | gru
  /// 0 means "the previous layer's output width" (or the data's input width).
  std::size_t in = 0;
  /// Output width for dense, hidden width for the recurrent cells.
  std::size_t units = 0;
  /// RNN output width (W_hy rows); 0 means equal to units.
  std::size_t out = 0;
  Activation activation = Activation::linear;
  double dropout = 0.0;
  OutputPeephole output_peephole = OutputPeephole::current_cell;
  bool recurrent_block_input = false;
};

enum class LinearKind { dense, arx };

struct ModelSpec {
  std::vector<LayerSpec> layers;
  LinearKind linear = LinearKind::dense;
  std::size_t na = 5;
  std::size_t nb = 5;
  InitOptions init;

  /// Checks that the layers form a connected n_inputs -> n_outputs stack.
  void validate(std::size_t n_inputs, std::size_t n_outputs) const;
};

struct DataSpec {
  enum class Source { synthetic, daisy, csv };
  Source source = Source::synthetic;
  SyntheticSpec synthetic;
  std::size_t samples = 5000;
  std::filesystem::path path;
  std::size_t n_inputs = 1;
  std::size_t n_outputs = 1;
  ColumnMap columns;
  std::vector<std::string> csv_inputs, csv_outputs;
  /// Per-channel standardization fitted on the training split.
  bool standardize = false;

  std::size_t input_width() const;
  std::size_t output_width() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec model;
  TrainConfig train;
  DataSpec data;
  std::filesystem::path out_dir = "runs/experiment";

  /// Throws ConfigError (or ShapeError for disconnected stacks); checks that referenced files exist.
  void validate() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ModelSpec& spec);
/// default_dropout applies to recurrent layers without an explicit dropout.
ModelSpec model_spec_from_json(const nlohmann::json& j, double default_dropout = 0.0);
nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_from_json(const nlohmann::json& j);

/// Applies the keys present in `patch` on top of `base` (recursive merge).
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& patch);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Builds the model with parameters drawn from seed.
HammersteinModel build_model(const ModelSpec& spec, std::size_t n_inputs, std::size_t n_outputs, std::uint64_t seed);

Dataset load_dataset(const DataSpec& spec);

struct PreparedData {
  SplitDataset split;
  Standardizer standardizer;  // empty unless standardization is on
};

PreparedData prepare_data(const DataSpec& spec, double split_ratio);

struct RunOptions {
  /// Write wall-clock seconds into history.csv and report.json as well.
  bool timing_in_outputs = false;
  std::ostream* log = nullptr;
};

struct TrainOutcome {
  RunHistory history;
  EvalReport train_report;
  EvalReport test_report;
  std::size_t param_count = 0;
};

/// Trains per config and writes history.csv, report.json, report.txt,
/// predictions.csv, checkpoint.bin and meta.json into config.out_dir.
TrainOutcome run_train(const ExperimentConfig& config, const RunOptions& options = {});

/// Report JSON as written by run_train; also used by eval.
nlohmann::json make_report_json(const ExperimentConfig& config, std::size_t param_count, const EvalReport& train,
                                const EvalReport& test, bool include_timing);

void write_predictions(const std::filesystem::path& path, const HammersteinModel& model, const SplitDataset& data);

}  // namespace sidnn
