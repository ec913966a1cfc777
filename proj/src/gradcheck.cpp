#include "sidnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sidnn/errors.hpp"

namespace sidnn {

CellFamily parse_cell_family(std::string_view name) {
  if (name == "dense" || name == "mlp") return CellFamily::dense;
  if (name == "rnn") return CellFamily::rnn;
  if (name == "lstm") return CellFamily::lstm;
  if (name == "fastlstm") return CellFamily::fastlstm;
  if (name == "gru") return CellFamily::gru;
  throw ConfigError("unknown cell family '" + std::string(name) + "' (expected dense, mlp, rnn, lstm, fastlstm, gru)");
}

std::string_view to_string(CellFamily family) {
  switch (family) {
    case CellFamily::dense: return "dense";
    case CellFamily::rnn: return "rnn";
    case CellFamily::lstm: return "lstm";
    case CellFamily::fastlstm: return "fastlstm";
    case CellFamily::gru: return "gru";
  }
  return "?";
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

Cell random_cell(CellFamily family, std::size_t in, std::size_t hidden, SeededRng& rng) {
  // Scale 0.8 keeps gates away from saturation while exercising nonlinearity.
  InitOptions init{.scale = 0.8, .forget_bias = 0.5};
  Cell cell;
  switch (family) {
    case CellFamily::dense: cell = DenseLayer::random(in, hidden, Activation::tanh, rng, init); break;
    case CellFamily::rnn: cell = RnnCell::random(in, hidden, 2, Activation::tanh, rng, init); break;
    case CellFamily::lstm: cell = LstmCell::random(in, hidden, rng, init); break;
    case CellFamily::fastlstm: cell = FastLstmCell::random(in, hidden, rng, init); break;
    case CellFamily::gru: cell = GruCell::random(in, hidden, rng, init); break;
  }
  // Biases are zero after random(); randomize them too so their gradients are generic.
  std::visit(
      [&](auto& c) {
        for_each_tensor(c, [&](std::string_view, std::span<double> s) {
          for (double& v : s) {
            if (v == 0.0) v = rng.uniform(-0.5, 0.5);
          }
        });
      },
      cell);
  return cell;
}

namespace {

double objective(const Cell& cell, const std::vector<Vector>& inputs, const std::vector<Vector>& output_grads) {
  CellState state = std::visit([](const auto& c) { return zero_state(c); }, cell);
  double total = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Vector out = std::visit([&](const auto& c) { return step_forward(c, inputs[t], state, nullptr); }, cell);
    for (std::size_t i = 0; i < out.size(); ++i) total += output_grads[t][i] * out[i];
  }
  return total;
}

std::vector<std::pair<std::string, std::span<double>>> named_tensors(Cell& cell) {
  std::vector<std::pair<std::string, std::span<double>>> out;
  std::visit(
      [&](auto& c) { for_each_tensor(c, [&](std::string_view n, std::span<double> s) { out.emplace_back(n, s); }); },
      cell);
  return out;
}

}  // namespace

GradCheckResult check_cell(const Cell& cell, const std::vector<Vector>& inputs, const std::vector<Vector>& output_grads,
                           const GradCheckOptions& options) {
  if (inputs.empty()) throw StateError("gradcheck: empty input sequence");
  if (output_grads.size() != inputs.size()) throw ShapeError("gradcheck: one output gradient per step is required");
  if (!(options.step > 0.0)) throw ConfigError("gradcheck: step must be positive");

  std::vector<TapeStep> tape(inputs.size());
  CellState state = std::visit([](const auto& c) { return zero_state(c); }, cell);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    std::visit([&](const auto& c) { step_forward(c, inputs[t], state, &tape[t]); }, cell);
  }
  Cell analytic = cell_backward(cell, tape, output_grads, inputs.size());
  auto analytic_tensors = named_tensors(analytic);
  if (options.corrupt) {
    for (auto& [name, span] : analytic_tensors) {
      if (!span.empty()) {
        span[0] = span[0] * 1.5 + 1e-3;
        break;
      }
    }
  }

  Cell probe = cell;
  auto probe_tensors = named_tensors(probe);
  GradCheckResult result;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    auto& [name, span] = probe_tensors[t];
    for (std::size_t i = 0; i < span.size(); ++i) {
      const double saved = span[i];
      span[i] = saved + options.step;
      const double up = objective(probe, inputs, output_grads);
      span[i] = saved - options.step;
      const double down = objective(probe, inputs, output_grads);
      span[i] = saved;
      GradCheckEntry e{name, i, analytic_tensors[t].second[i], (up - down) / (2.0 * options.step), 0.0};
      e.rel_error = relative_error(e.analytic, e.numeric, options.floor);
      ++result.checked;
      if (e.rel_error >= result.max_rel_error) {
        result.max_rel_error = e.rel_error;
        result.worst = e;
      }
      if (e.rel_error > options.tolerance) result.failures.push_back(e);
    }
  }
  return result;
}

GradCheckResult check_family(CellFamily family, std::size_t hidden, std::size_t seq_len, std::uint64_t seed,
                             const GradCheckOptions& options) {
  if (hidden == 0 || seq_len == 0) throw ConfigError("gradcheck: hidden size and sequence length must be >= 1");
  SeededRng rng(mix_seed(seed, 0x6743ULL));
  constexpr std::size_t in = 2;
  const Cell cell = random_cell(family, in, hidden, rng);
  const std::size_t out = std::visit([](const auto& c) { return c.output_size(); }, cell);
  std::vector<Vector> inputs(seq_len, Vector(in));
  std::vector<Vector> grads(seq_len, Vector(out));
  for (auto& x : inputs)
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto& g : grads)
    for (double& v : g) v = rng.uniform(-1.0, 1.0);
  return check_cell(cell, inputs, grads, options);
}

}  // namespace sidnn
