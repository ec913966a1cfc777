// sidnn command-line experiment runner.
//
//   sidnn train --preset sr-mlp [--config file.json] [--epochs N] [--timing]
//   sidnn eval --checkpoint runs/sr-mlp/checkpoint.bin [--data file.dat]
//   sidnn gradcheck lstm [--hidden 3] [--steps 4]
//   sidnn gen --n 5000 --out synth.dat [--spec spec.json]
//
// Global flags: --config, --seed, --out-dir, --literal-eq3, --inner-loops.
// Exit codes: 0 success, 1 validation error, 2 runtime or divergence error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sidnn/checkpoint.hpp"
#include "sidnn/errors.hpp"
#include "sidnn/experiment.hpp"
#include "sidnn/gradcheck.hpp"
#include "sidnn/presets.hpp"

using nlohmann::json;
using namespace sidnn;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool literal_eq3 = false;
  std::optional<std::size_t> inner_loops;
};

struct TrainFlags {
  std::string preset;
  std::optional<std::size_t> epochs;
  bool timing = false;
};

struct EvalFlags {
  std::string checkpoint;
  std::string data;
  std::optional<std::size_t> n_inputs, n_outputs;
};

struct GradcheckFlags {
  std::string kind;
  std::size_t hidden = 3;
  std::size_t steps = 4;
  double tolerance = 1e-5;
  bool corrupt = false;
};

struct GenFlags {
  std::string spec;
  std::size_t n = 0;
  std::string out;
};

ExperimentConfig resolve_config(const GlobalFlags& g, const TrainFlags& t) {
  if (t.preset.empty() && g.config.empty()) throw ConfigError("train needs --preset or --config");
  json j = t.preset.empty() ? json::object() : preset_config(t.preset);
  if (!g.config.empty()) j = merge_config(j, read_json_file(g.config));
  if (!j.contains("train")) j["train"] = json::object();
  if (g.seed) j["train"]["seed"] = *g.seed;
  if (g.literal_eq3) j["train"]["literal_eq3"] = true;
  if (g.inner_loops) j["train"]["inner_loops"] = *g.inner_loops;
  if (t.epochs) j["train"]["epochs"] = *t.epochs;
  if (!g.out_dir.empty()) j["out_dir"] = g.out_dir;
  return experiment_from_json(j);
}

int cmd_train(const GlobalFlags& g, const TrainFlags& t) {
  const ExperimentConfig config = resolve_config(g, t);
  config.validate();
  std::cout << "training " << config.name << " -> " << config.out_dir.string() << "\n";
  RunOptions options;
  options.timing_in_outputs = t.timing;
  options.log = &std::cerr;
  const TrainOutcome outcome = run_train(config, options);
  std::cout << "parameters: " << outcome.param_count << "\n";
  std::cout << format_table({{config.name + " (est)", outcome.train_report},
                             {config.name + " (val)", outcome.test_report}});
  return kOk;
}

int cmd_eval(const GlobalFlags& g, const EvalFlags& e) {
  Checkpoint ck = load_checkpoint(e.checkpoint);
  const std::filesystem::path out_dir = g.out_dir.empty() ? std::filesystem::path{} : std::filesystem::path(g.out_dir);
  if (!e.data.empty()) {
    const std::size_t n_in = e.n_inputs.value_or(ck.n_inputs);
    const std::size_t n_out = e.n_outputs.value_or(ck.n_outputs);
    const std::size_t columns = daisy_column_count(e.data);
    if (columns != n_in + n_out) {
      throw ShapeError("'" + e.data + "' has " + std::to_string(columns) + " columns, expected " +
                       std::to_string(n_in) + " inputs + " + std::to_string(n_out) + " outputs");
    }
    Dataset data = load_daisy(e.data, n_in, n_out, ColumnMap::contiguous(n_in, n_out));
    if (!ck.standardizer.empty()) data = ck.standardizer.apply(data);
    const EvalReport report = evaluate(ck.model, data);
    std::cout << format_table({{data.name, report}});
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ofstream(out_dir / "report.json") << json{{"name", ck.config.name}, {"evaluation", to_json(report, false)}}.dump(2)
                                             << "\n";
    }
    return kOk;
  }
  PreparedData data = prepare_data(ck.config.data, ck.config.train.split_ratio);
  const EvalReport est = evaluate(ck.model, data.split.train);
  const EvalReport val = data.split.test.sample_count() > 0 ? evaluate(ck.model, data.split.test) : EvalReport{};
  std::cout << format_table({{ck.config.name + " (est)", est}, {ck.config.name + " (val)", val}});
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "report.json")
        << make_report_json(ck.config, param_count(ck.model), est, val, false).dump(2) << "\n";
  }
  return kOk;
}

int cmd_gradcheck(const GlobalFlags& g, const GradcheckFlags& f) {
  const CellFamily family = parse_cell_family(f.kind);
  GradCheckOptions options;
  options.tolerance = f.tolerance;
  options.corrupt = f.corrupt;
  const GradCheckResult r = check_family(family, f.hidden, f.steps, g.seed.value_or(1), options);
  std::printf("gradcheck %s: %zu parameters, max relative error %.3e (tolerance %.1e)\n",
              std::string(to_string(family)).c_str(), r.checked, r.max_rel_error, options.tolerance);
  if (r.passed()) return kOk;
  for (const auto& e : r.failures) {
    std::printf("  FAIL %s[%zu]: analytic %.10e numeric %.10e rel %.3e\n", e.tensor.c_str(), e.index, e.analytic,
                e.numeric, e.rel_error);
  }
  return kRuntime;
}

int cmd_gen(const GenFlags& f) {
  SyntheticSpec spec;
  if (!f.spec.empty()) {
    json j = read_json_file(f.spec);
    if (j.contains("synthetic")) j = j.at("synthetic");
    spec = synthetic_from_json(j);
  }
  spec.validate();
  if (f.n == 0) throw ConfigError("gen: --n must be >= 1");
  auto [data, truth] = gen_synthetic(spec, f.n);
  write_daisy(f.out, data, "sidnn synthetic Hammerstein data\ncolumns: u y");
  const json sidecar{{"spec", to_json(spec)}, {"samples", f.n}, {"clean_y", truth.clean_y}};
  const std::string sidecar_path = f.out + ".truth.json";
  std::ofstream out(sidecar_path);
  if (!out) throw IoError("cannot open '" + sidecar_path + "' for writing");
  out << sidecar.dump() << "\n";
  std::cout << "wrote " << f.n << " samples to " << f.out << " and " << sidecar_path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sidnn: neural network system identification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "Experiment configuration (JSON)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_flag("--literal-eq3", g.literal_eq3, "Use the update w <- eta*w - alpha*grad instead of momentum");
  app.add_option("--inner-loops", g.inner_loops, "Updates per mini-batch");

  TrainFlags t;
  auto* train = app.add_subcommand("train", "Train a model and write history, report, predictions and checkpoint");
  std::string presets;
  for (const auto& n : preset_names()) presets += (presets.empty() ? "" : ", ") + n;
  train->add_option("--preset", t.preset, "Bundled configuration: " + presets);
  train->add_option("--epochs", t.epochs, "Override the number of epochs");
  train->add_flag("--timing", t.timing, "Also write wall-clock seconds into history.csv and report.json");

  EvalFlags e;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", e.checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", e.data, "DaISy-style file (inputs then outputs); default: the checkpoint's own data");
  eval->add_option("--n-inputs", e.n_inputs, "Input columns in --data");
  eval->add_option("--n-outputs", e.n_outputs, "Output columns in --data");

  GradcheckFlags gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of a cell family's gradients");
  gradcheck->add_option("kind", gc.kind, "mlp | dense | rnn | lstm | fastlstm | gru")->required();
  gradcheck->add_option("--hidden", gc.hidden, "Hidden size");
  gradcheck->add_option("--steps", gc.steps, "Sequence length");
  gradcheck->add_option("--tolerance", gc.tolerance, "Maximum relative error");
  gradcheck->add_flag("--corrupt", gc.corrupt, "Perturb one analytic gradient (negative control)");

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic Hammerstein dataset");
  gen_cmd->add_option("--spec", gen.spec, "Synthetic spec (JSON); default: tanh, a=[-0.7], b=[0.3]");
  gen_cmd->add_option("--n", gen.n, "Number of samples")->required();
  gen_cmd->add_option("--out", gen.out, "Output DaISy file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*train) return cmd_train(g, t);
    if (*eval) return cmd_eval(g, e);
    if (*gradcheck) return cmd_gradcheck(g, gc);
    if (*gen_cmd) return cmd_gen(gen);
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kValidation;
  } catch (const ShapeError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kValidation;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kValidation;
  } catch (const DivergenceError& err) {
    std::cerr << "diverged: " << err.what() << "\n";
    return kRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
