#include "sidnn/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>

#include "sidnn/checkpoint.hpp"
#include "sidnn/errors.hpp"
#include "sidnn/kernels.hpp"

namespace sidnn {

using nlohmann::json;

namespace {

bool is_recurrent(const std::string& type) { return type == "rnn" || type == "lstm" || type == "fastlstm" || type == "gru"; }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string_view to_string(OutputPeephole p) { return p == OutputPeephole::previous_cell ? "previous_cell" : "current_cell"; }

OutputPeephole parse_peephole(const std::string& s) {
  if (s == "previous_cell") return OutputPeephole::previous_cell;
  if (s == "current_cell") return OutputPeephole::current_cell;
  throw ConfigError("output_peephole must be previous_cell or current_cell, got '" + s + "'");
}

LayerSpec layer_from_json(const json& j, std::size_t index, double default_dropout) {
  const std::string where = "model.layers[" + std::to_string(index) + "]";
  check_keys(j, where, {"type", "in", "units", "out", "activation", "dropout", "output_peephole", "recurrent_block_input"});
  LayerSpec l;
  l.type = get_or<std::string>(j, "type", "", where);
  if (l.type != "dense" && !is_recurrent(l.type)) {
    throw ConfigError(where + ".type must be one of dense, rnn, lstm, fastlstm, gru");
  }
  l.in = get_count(j, "in", 0, where);
  l.units = get_count(j, "units", 0, where);
  l.out = get_count(j, "out", 0, where);
  const std::string act = get_or<std::string>(j, "activation", l.type == "rnn" ? "tanh" : "linear", where);
  try {
    l.activation = parse_activation(act);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  l.dropout = get_or<double>(j, "dropout", is_recurrent(l.type) ? default_dropout : 0.0, where);
  l.output_peephole = parse_peephole(get_or<std::string>(j, "output_peephole", "current_cell", where));
  l.recurrent_block_input = get_or<bool>(j, "recurrent_block_input", false, where);
  return l;
}

json layer_to_json(const LayerSpec& l) {
  json j{{"type", l.type}, {"units", l.units}};
  if (l.in) j["in"] = l.in;
  if (l.type == "dense" || l.type == "rnn") j["activation"] = std::string(to_string(l.activation));
  if (l.type == "rnn" && l.out) j["out"] = l.out;
  j["dropout"] = l.dropout;
  if (l.type == "lstm") j["output_peephole"] = std::string(to_string(l.output_peephole));
  if (l.type == "fastlstm") j["recurrent_block_input"] = l.recurrent_block_input;
  return j;
}

std::size_t layer_output(const LayerSpec& l) { return l.type == "rnn" && l.out ? l.out : l.units; }

}  // namespace

void ModelSpec::validate(std::size_t n_inputs, std::size_t n_outputs) const {
  if (layers.empty()) throw ConfigError("model.layers must not be empty");
  std::size_t width = n_inputs;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.units == 0) throw ConfigError("model.layers[" + std::to_string(k) + "].units must be >= 1");
    if (l.in != 0 && l.in != width) {
      throw ShapeError("model.layers[" + std::to_string(k) + "] declares input width " + std::to_string(l.in) +
                       " but receives " + std::to_string(width));
    }
    if (!(l.dropout >= 0.0 && l.dropout < 1.0)) {
      throw ConfigError("model.layers[" + std::to_string(k) + "].dropout must be in [0, 1)");
    }
    width = layer_output(l);
  }
  if (width != n_outputs) {
    throw ShapeError("model stack ends with width " + std::to_string(width) + " but the data has " +
                     std::to_string(n_outputs) + " output channel(s)");
  }
  if (linear == LinearKind::arx && nb == 0) throw ConfigError("model.nb must be >= 1 for an arx linear block");
  if (init.scale < 0.0) throw ConfigError("model.init.scale must be >= 0");
}

std::size_t DataSpec::input_width() const {
  switch (source) {
    case Source::synthetic: return 1;
    case Source::daisy: return n_inputs;
    case Source::csv: return csv_inputs.size();
  }
  return 0;
}

std::size_t DataSpec::output_width() const {
  switch (source) {
    case Source::synthetic: return 1;
    case Source::daisy: return n_outputs;
    case Source::csv: return csv_outputs.size();
  }
  return 0;
}

void ExperimentConfig::validate() const {
  train.validate();
  model.validate(data.input_width(), data.output_width());
  switch (data.source) {
    case DataSpec::Source::synthetic:
      data.synthetic.validate();
      if (data.samples < 2) throw ConfigError("data.samples must be >= 2");
      break;
    case DataSpec::Source::daisy:
    case DataSpec::Source::csv:
      if (data.path.empty()) throw ConfigError("data.path is required");
      if (!std::filesystem::exists(data.path)) throw ConfigError("data file '" + data.path.string() + "' does not exist");
      if (data.input_width() == 0 || data.output_width() == 0) throw ConfigError("data needs at least one input and one output");
      break;
  }
}

json to_json(const SyntheticSpec& s) {
  return json{{"nonlinearity", std::string(to_string(s.nonlinearity))},
              {"a", s.a},
              {"b", s.b},
              {"noise_std", s.noise.kind == NoiseSpec::Kind::gaussian ? s.noise.std : 0.0},
              {"input", std::string(to_string(s.input_kind))},
              {"prbs_hold", s.prbs_hold},
              {"input_std", s.input_std},
              {"seed", s.seed}};
}

SyntheticSpec synthetic_from_json(const json& j) {
  const std::string where = "synthetic";
  check_keys(j, where, {"nonlinearity", "a", "b", "noise_std", "input", "prbs_hold", "input_std", "seed"});
  SyntheticSpec s;
  s.nonlinearity = parse_nonlinearity(get_or<std::string>(j, "nonlinearity", "tanh", where));
  s.a = get_or<Vector>(j, "a", s.a, where);
  s.b = get_or<Vector>(j, "b", s.b, where);
  const double noise = get_or<double>(j, "noise_std", 0.0, where);
  s.noise.kind = noise > 0.0 ? NoiseSpec::Kind::gaussian : NoiseSpec::Kind::none;
  s.noise.std = noise;
  if (noise < 0.0) throw ConfigError("synthetic.noise_std must be >= 0");
  s.input_kind = parse_input_kind(get_or<std::string>(j, "input", "prbs", where));
  s.prbs_hold = get_count(j, "prbs_hold", 1, where);
  s.input_std = get_or<double>(j, "input_std", 1.0, where);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed, where);
  return s;
}

json to_json(const ModelSpec& m) {
  json layers = json::array();
  for (const auto& l : m.layers) layers.push_back(layer_to_json(l));
  json j{{"layers", layers}, {"linear", m.linear == LinearKind::arx ? "arx" : "dense"}};
  if (m.linear == LinearKind::arx) {
    j["na"] = m.na;
    j["nb"] = m.nb;
  }
  j["init"] = json{{"scale", m.init.scale}, {"forget_bias", m.init.forget_bias}};
  return j;
}

ModelSpec model_spec_from_json(const json& j, double default_dropout) {
  check_keys(j, "model", {"layers", "linear", "na", "nb", "init"});
  ModelSpec m;
  if (!j.contains("layers") || !j.at("layers").is_array()) throw ConfigError("model.layers must be an array");
  for (std::size_t k = 0; k < j.at("layers").size(); ++k) {
    m.layers.push_back(layer_from_json(j.at("layers")[k], k, default_dropout));
  }
  const std::string linear = get_or<std::string>(j, "linear", "dense", "model");
  if (linear == "dense") m.linear = LinearKind::dense;
  else if (linear == "arx") m.linear = LinearKind::arx;
  else throw ConfigError("model.linear must be dense or arx, got '" + linear + "'");
  m.na = get_count(j, "na", 5, "model");
  m.nb = get_count(j, "nb", 5, "model");
  if (j.contains("init")) {
    const json& init = j.at("init");
    check_keys(init, "model.init", {"scale", "forget_bias"});
    m.init.scale = get_or<double>(init, "scale", 0.0, "model.init");
    m.init.forget_bias = get_or<double>(init, "forget_bias", 1.0, "model.init");
  }
  return m;
}

namespace {

TrainConfig train_from_json(const json& j) {
  const std::string where = "train";
  check_keys(j, where,
             {"learning_rate", "momentum", "batch_size", "epochs", "inner_loops", "bptt_horizon", "dropout_p", "seed",
              "split_ratio", "literal_eq3"});
  TrainConfig t;
  t.learning_rate = get_or<double>(j, "learning_rate", t.learning_rate, where);
  t.momentum = get_or<double>(j, "momentum", t.momentum, where);
  t.batch_size = get_count(j, "batch_size", t.batch_size, where);
  t.epochs = get_count(j, "epochs", t.epochs, where);
  t.inner_loops = get_count(j, "inner_loops", t.inner_loops, where);
  t.bptt_horizon = get_count(j, "bptt_horizon", t.bptt_horizon, where);
  t.dropout_p = get_or<double>(j, "dropout_p", t.dropout_p, where);
  t.seed = get_or<std::uint64_t>(j, "seed", t.seed, where);
  t.split_ratio = get_or<double>(j, "split_ratio", t.split_ratio, where);
  t.literal_eq3 = get_or<bool>(j, "literal_eq3", t.literal_eq3, where);
  return t;
}

json to_json(const TrainConfig& t) {
  return json{{"learning_rate", t.learning_rate}, {"momentum", t.momentum},       {"batch_size", t.batch_size},
              {"epochs", t.epochs},               {"inner_loops", t.inner_loops}, {"bptt_horizon", t.bptt_horizon},
              {"dropout_p", t.dropout_p},         {"seed", t.seed},               {"split_ratio", t.split_ratio},
              {"literal_eq3", t.literal_eq3}};
}

DataSpec data_from_json(const json& j) {
  const std::string where = "data";
  check_keys(j, where,
             {"source", "synthetic", "samples", "path", "n_inputs", "n_outputs", "columns", "inputs", "outputs",
              "standardize"});
  DataSpec d;
  const std::string source = get_or<std::string>(j, "source", "synthetic", where);
  d.standardize = get_or<bool>(j, "standardize", false, where);
  if (source == "synthetic") {
    d.source = DataSpec::Source::synthetic;
    if (j.contains("synthetic")) d.synthetic = synthetic_from_json(j.at("synthetic"));
    d.samples = get_count(j, "samples", d.samples, where);
  } else if (source == "daisy") {
    d.source = DataSpec::Source::daisy;
    d.path = get_or<std::string>(j, "path", "", where);
    d.n_inputs = get_count(j, "n_inputs", 0, where);
    d.n_outputs = get_count(j, "n_outputs", 0, where);
    if (j.contains("columns")) {
      const json& c = j.at("columns");
      check_keys(c, "data.columns", {"inputs", "outputs"});
      d.columns.inputs = get_or<std::vector<std::size_t>>(c, "inputs", {}, "data.columns");
      d.columns.outputs = get_or<std::vector<std::size_t>>(c, "outputs", {}, "data.columns");
    } else {
      d.columns = ColumnMap::contiguous(d.n_inputs, d.n_outputs);
    }
    if (d.columns.inputs.size() != d.n_inputs || d.columns.outputs.size() != d.n_outputs) {
      throw ConfigError("data.columns must list n_inputs input and n_outputs output columns");
    }
  } else if (source == "csv") {
    d.source = DataSpec::Source::csv;
    d.path = get_or<std::string>(j, "path", "", where);
    d.csv_inputs = get_or<std::vector<std::string>>(j, "inputs", {}, where);
    d.csv_outputs = get_or<std::vector<std::string>>(j, "outputs", {}, where);
  } else {
    throw ConfigError("data.source must be synthetic, daisy or csv, got '" + source + "'");
  }
  return d;
}

json to_json(const DataSpec& d) {
  json j;
  switch (d.source) {
    case DataSpec::Source::synthetic:
      j = json{{"source", "synthetic"}, {"samples", d.samples}, {"synthetic", to_json(d.synthetic)}};
      break;
    case DataSpec::Source::daisy:
      j = json{{"source", "daisy"},
               {"path", d.path.string()},
               {"n_inputs", d.n_inputs},
               {"n_outputs", d.n_outputs},
               {"columns", json{{"inputs", d.columns.inputs}, {"outputs", d.columns.outputs}}}};
      break;
    case DataSpec::Source::csv:
      j = json{{"source", "csv"}, {"path", d.path.string()}, {"inputs", d.csv_inputs}, {"outputs", d.csv_outputs}};
      break;
  }
  j["standardize"] = d.standardize;
  return j;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j, "config", {"name", "model", "train", "data", "out_dir"});
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name, "config");
  c.out_dir = get_or<std::string>(j, "out_dir", "runs/" + c.name, "config");
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  if (!j.contains("model")) throw ConfigError("config: 'model' is required");
  c.model = model_spec_from_json(j.at("model"), c.train.dropout_p);
  if (j.contains("data")) c.data = data_from_json(j.at("data"));
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{{"name", c.name},
              {"model", to_json(c.model)},
              {"train", to_json(c.train)},
              {"data", to_json(c.data)},
              {"out_dir", c.out_dir.string()}};
}

json merge_config(json base, const json& patch) {
  if (!patch.is_object() || !base.is_object()) return patch;
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      base[key] = merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

HammersteinModel build_model(const ModelSpec& spec, std::size_t n_inputs, std::size_t n_outputs, std::uint64_t seed) {
  spec.validate(n_inputs, n_outputs);
  SeededRng rng(mix_seed(seed, 0x1417ULL));
  CellStack stack;
  std::size_t width = n_inputs;
  for (const auto& l : spec.layers) {
    StackLayer layer{DenseLayer{}, l.dropout};
    if (l.type == "dense") {
      layer.cell = DenseLayer::random(width, l.units, l.activation, rng, spec.init);
    } else if (l.type == "rnn") {
      layer.cell = RnnCell::random(width, l.units, layer_output(l), l.activation, rng, spec.init);
    } else if (l.type == "lstm") {
      LstmCell cell = LstmCell::random(width, l.units, rng, spec.init);
      cell.output_peephole = l.output_peephole;
      layer.cell = std::move(cell);
    } else if (l.type == "fastlstm") {
      layer.cell = FastLstmCell::random(width, l.units, rng, spec.init, l.recurrent_block_input);
    } else {
      layer.cell = GruCell::random(width, l.units, rng, spec.init);
    }
    stack.layers.push_back(std::move(layer));
    width = layer_output(l);
  }
  std::vector<LinearDynamicBlock> blocks;
  if (spec.linear == LinearKind::arx) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.nb));
    for (std::size_t c = 0; c < n_outputs; ++c) {
      blocks.emplace_back(Vector(spec.na, 0.0), init_uniform(spec.nb, scale, rng));
    }
  }
  return HammersteinModel(std::move(stack), std::move(blocks));
}

Dataset load_dataset(const DataSpec& spec) {
  switch (spec.source) {
    case DataSpec::Source::synthetic: {
      Dataset d = gen_synthetic(spec.synthetic, spec.samples).first;
      d.name = "synthetic";
      return d;
    }
    case DataSpec::Source::daisy: return load_daisy(spec.path, spec.n_inputs, spec.n_outputs, spec.columns);
    case DataSpec::Source::csv: return load_csv(spec.path, spec.csv_inputs, spec.csv_outputs);
  }
  throw ConfigError("unknown data source");
}

PreparedData prepare_data(const DataSpec& spec, double split_ratio) {
  PreparedData p;
  p.split = split(load_dataset(spec), split_ratio);
  if (spec.standardize) {
    p.standardizer = Standardizer::fit(p.split.train);
    p.split.train = p.standardizer.apply(p.split.train);
    p.split.test = p.standardizer.apply(p.split.test);
  }
  return p;
}

json make_report_json(const ExperimentConfig& config, std::size_t param_count, const EvalReport& train,
                      const EvalReport& test, bool include_timing) {
  json echo = to_json(config);
  echo.erase("out_dir");
  return json{{"name", config.name},
              {"param_count", param_count},
              {"estimation", to_json(train, include_timing)},
              {"validation", to_json(test, include_timing)},
              {"config", echo}};
}

void write_predictions(const std::filesystem::path& path, const HammersteinModel& model, const SplitDataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "split,time";
  for (std::size_t c = 0; c < model.output_size(); ++c) out << ",y" << c << ",yhat" << c;
  out << '\n';
  char buf[64];
  std::size_t time = 0;
  for (const auto* part : {&data.train, &data.test}) {
    if (part->sample_count() == 0) continue;
    const auto yhat = predict(model, *part);
    const char* label = part == &data.train ? "train" : "test";
    for (std::size_t k = 0; k < part->sample_count(); ++k, ++time) {
      out << label << ',' << time;
      for (std::size_t c = 0; c < yhat[k].size(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", part->y[k][c]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", yhat[k][c]);
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

TrainOutcome run_train(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::string started = utc_timestamp();
  PreparedData data = prepare_data(config.data, config.train.split_ratio);
  const std::size_t n_in = data.split.train.n_inputs();
  const std::size_t n_out = data.split.train.n_outputs();
  HammersteinModel model = build_model(config.model, n_in, n_out, config.train.seed);

  TrainOutcome outcome;
  outcome.param_count = param_count(model);
  TrainOptions train_options;
  train_options.log = options.log;
  outcome.history = train(model, data.split, config.train, train_options);
  outcome.train_report = build_report(model, data.split.train, outcome.history);
  outcome.test_report = data.split.test.sample_count() > 0 ? build_report(model, data.split.test, outcome.history)
                                                           : EvalReport{};

  std::filesystem::create_directories(config.out_dir);
  const auto& dir = config.out_dir;
  outcome.history.write_csv(dir / "history.csv", options.timing_in_outputs);
  write_text(dir / "report.json",
             make_report_json(config, outcome.param_count, outcome.train_report, outcome.test_report,
                              options.timing_in_outputs)
                     .dump(2) +
                 "\n");
  write_text(dir / "report.txt", format_table({{config.name + " (est)", outcome.train_report},
                                               {config.name + " (val)", outcome.test_report}}));
  write_predictions(dir / "predictions.csv", model, data.split);
  save_checkpoint(dir / "checkpoint.bin", Checkpoint{config, n_in, n_out, data.standardizer, model});

  json epochs = json::array();
  for (const auto& e : outcome.history.epochs) epochs.push_back(json{{"epoch", e.epoch}, {"seconds", e.seconds}, {"val_fit", e.val_fit}});
  const json meta{{"config", to_json(config)},
                  {"started_utc", started},
                  {"finished_utc", utc_timestamp()},
                  {"training_seconds", outcome.history.total_seconds},
                  {"epochs", epochs},
                  {"param_count", outcome.param_count},
                  {"openmp", kernels::openmp_enabled()},
                  {"max_threads", kernels::max_threads()},
                  {"compiler", __VERSION__}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  return outcome;
}

}  // namespace sidnn
