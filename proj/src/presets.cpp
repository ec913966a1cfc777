#include "sidnn/presets.hpp"

#include <cstdlib>
#include <map>

#include "sidnn/errors.hpp"

namespace sidnn {

namespace {

// Soft-robot stand-in: the recording is private, so sr-* presets train on
// the synthetic Hammerstein system below.
constexpr const char* kSyntheticData = R"({
  "source": "synthetic",
  "samples": 5000,
  "synthetic": {"nonlinearity": "tanh", "a": [-0.7], "b": [0.3], "noise_std": 0.01,
                "input": "prbs", "prbs_hold": 1, "seed": 11}
})";

constexpr const char* kGlassData = R"({
  "source": "daisy",
  "path": "data/glassfurnace.dat",
  "n_inputs": 3,
  "n_outputs": 6,
  "columns": {"inputs": [1, 2, 3], "outputs": [4, 5, 6, 7, 8, 9]}
})";

constexpr const char* kTrain = R"({
  "learning_rate": 0.001, "momentum": 0.9, "batch_size": 100, "epochs": 50,
  "inner_loops": 1, "bptt_horizon": 5, "seed": 1, "split_ratio": 0.6
})";

const std::map<std::string, const char*>& models() {
  static const std::map<std::string, const char*> m{
      {"sr-mlp", R"({"layers": [
          {"type": "dense", "in": 1, "units": 6, "activation": "relu"},
          {"type": "dense", "units": 1, "activation": "linear"}], "linear": "dense"})"},
      {"sr-rnn", R"({"layers": [
          {"type": "rnn", "in": 1, "units": 8, "out": 1, "activation": "tanh"}],
          "linear": "arx", "na": 5, "nb": 5})"},
      {"sr-lstm", R"({"layers": [
          {"type": "lstm", "in": 1, "units": 1, "dropout": 0.3},
          {"type": "lstm", "units": 10, "dropout": 0.3},
          {"type": "lstm", "units": 100, "dropout": 0.3},
          {"type": "dense", "units": 1, "activation": "linear"}], "linear": "dense"})"},
      {"sr-fastlstm", R"({"layers": [
          {"type": "fastlstm", "in": 1, "units": 1, "dropout": 0.3},
          {"type": "fastlstm", "units": 10, "dropout": 0.3},
          {"type": "fastlstm", "units": 100, "dropout": 0.3},
          {"type": "dense", "units": 1, "activation": "linear"}], "linear": "dense"})"},
      {"sr-gru", R"({"layers": [
          {"type": "gru", "in": 1, "units": 1, "dropout": 0.35},
          {"type": "gru", "units": 10, "dropout": 0.35},
          {"type": "gru", "units": 100, "dropout": 0.35},
          {"type": "dense", "units": 1, "activation": "linear"}], "linear": "dense"})"},
      {"glass-mlp", R"({"layers": [
          {"type": "dense", "in": 3, "units": 6, "activation": "relu"},
          {"type": "dense", "units": 6, "activation": "linear"}], "linear": "dense"})"},
      {"glass-rnn", R"({"layers": [
          {"type": "rnn", "in": 3, "units": 8, "out": 6, "activation": "tanh"}],
          "linear": "arx", "na": 5, "nb": 5})"},
      {"glass-lstm", R"({"layers": [
          {"type": "lstm", "in": 3, "units": 1, "dropout": 0.3},
          {"type": "lstm", "units": 10, "dropout": 0.3},
          {"type": "lstm", "units": 100, "dropout": 0.3},
          {"type": "dense", "units": 6, "activation": "linear"}], "linear": "dense"})"},
      {"glass-fastlstm", R"({"layers": [
          {"type": "fastlstm", "in": 3, "units": 1, "dropout": 0.3},
          {"type": "fastlstm", "units": 10, "dropout": 0.3},
          {"type": "fastlstm", "units": 100, "dropout": 0.3},
          {"type": "dense", "units": 6, "activation": "linear"}], "linear": "dense"})"},
  };
  return m;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : models()) names.push_back(name);
  return names;
}

nlohmann::json preset_config(const std::string& name) {
  const auto it = models().find(name);
  if (it == models().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  const bool glass = name.starts_with("glass-");
  nlohmann::json data = nlohmann::json::parse(glass ? kGlassData : kSyntheticData);
  if (glass) {
    if (const char* env = std::getenv("SIDNN_GLASSFURNACE"); env && *env) data["path"] = env;
  }
  return nlohmann::json{{"name", name},
                        {"model", nlohmann::json::parse(it->second)},
                        {"train", nlohmann::json::parse(kTrain)},
                        {"data", data},
                        {"out_dir", "runs/" + name}};
}

}  // namespace sidnn
