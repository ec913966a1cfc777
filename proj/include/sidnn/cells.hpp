#pragma once

// Network building blocks: dense layer, simple RNN, peephole LSTM, fast
// LSTM and GRU. Each cell type exposes
//   * a public single-step function (dense_forward, rnn_step, ...),
//   * step_forward / step_backward overloads that record and consume a
//     TapeStep, used by truncated BPTT in stack.hpp,
//   * tensors() returning its parameters in declaration order.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <tuple>
#include <utility>

#include "sidnn/numerics.hpp"
#include "sidnn/rng.hpp"

namespace sidnn {

struct InitOptions {
  /// Half-width of the uniform weight distribution; 0 selects 1/sqrt(fan_in).
  double scale = 0.0;
  /// Initial value of forget-gate biases (LSTM variants).
  double forget_bias = 1.0;
};

/// Recurrent state of one layer. c is empty except for the LSTM variants.
struct CellState {
  Vector h;
  Vector c;
};

/// Everything one forward step must remember for its backward step.
/// Only the fields used by the owning cell type are filled.
struct TapeStep {
  Vector x;
  Vector h_prev;
  Vector c_prev;
  Vector pre;  // dense / rnn hidden pre-activation
  Vector h;    // dense output, rnn hidden, lstm/gru hidden
  Vector i, f, z, o, c, tanh_c;  // lstm gates and cell
  Vector r, hbar;                // gru reset gate and candidate (z shared)
  Vector mask;                   // dropout multipliers; empty when inactive
};

/// Gradients flowing backwards in time into step t-1.
struct BackwardCarry {
  Vector dh;
  Vector dc;
};

inline std::span<double> as_span(Matrix& m) { return m.values(); }
inline std::span<const double> as_span(const Matrix& m) { return m.values(); }
inline std::span<double> as_span(Vector& v) { return v; }
inline std::span<const double> as_span(const Vector& v) { return v; }

struct DenseLayer {
  Matrix W;
  Vector b;
  Activation activation = Activation::linear;

  static DenseLayer random(std::size_t in, std::size_t out, Activation act, SeededRng& rng,
                           const InitOptions& init = {});

  std::size_t input_size() const { return W.cols(); }
  std::size_t output_size() const { return W.rows(); }
  std::size_t hidden_size() const { return 0; }
  void validate() const;

  static constexpr std::array<std::string_view, 2> tensor_names{"W", "b"};
  auto tensors() { return std::tie(W, b); }
  auto tensors() const { return std::tie(W, b); }
};

/// h_k = H(W_uh u_k + W_hh h_{k-1} + b_h),  y_k = W_hy h_k + b_y
struct RnnCell {
  Matrix W_uh, W_hh, W_hy;
  Vector b_h, b_y;
  Activation hidden_fn = Activation::tanh;

  static RnnCell random(std::size_t in, std::size_t hidden, std::size_t out, Activation hidden_fn,
                        SeededRng& rng, const InitOptions& init = {});

  std::size_t input_size() const { return W_uh.cols(); }
  std::size_t hidden_size() const { return W_hh.rows(); }
  std::size_t output_size() const { return W_hy.rows(); }
  void validate() const;

  static constexpr std::array<std::string_view, 5> tensor_names{"W_uh", "W_hh", "W_hy", "b_h", "b_y"};
  auto tensors() { return std::tie(W_uh, W_hh, W_hy, b_h, b_y); }
  auto tensors() const { return std::tie(W_uh, W_hh, W_hy, b_h, b_y); }
};

/// Which cell state the output-gate peephole reads.
enum class OutputPeephole {
  previous_cell,  // w_co ⊙ c_{t-1}
  current_cell,   // w_co ⊙ c_t
};

/// LSTM with peephole connections from the cell to all three gates.
struct LstmCell {
  Matrix W_ui, W_hi, W_uf, W_hf, W_uc, W_hc, W_uo, W_ho;
  Vector w_ci, w_cf, w_co;
  Vector b_i, b_f, b_c, b_o;
  OutputPeephole output_peephole = OutputPeephole::current_cell;

  static LstmCell random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init = {});

  std::size_t input_size() const { return W_ui.cols(); }
  std::size_t hidden_size() const { return W_hi.rows(); }
  std::size_t output_size() const { return hidden_size(); }
  void validate() const;

  static constexpr std::array<std::string_view, 15> tensor_names{
      "W_ui", "W_hi", "W_uf", "W_hf", "W_uc", "W_hc", "W_uo", "W_ho",
      "w_ci", "w_cf", "w_co", "b_i",  "b_f",  "b_c",  "b_o"};
  auto tensors() { return std::tie(W_ui, W_hi, W_uf, W_hf, W_uc, W_hc, W_uo, W_ho, w_ci, w_cf, w_co, b_i, b_f, b_c, b_o); }
  auto tensors() const {
    return std::tie(W_ui, W_hi, W_uf, W_hf, W_uc, W_hc, W_uo, W_ho, w_ci, w_cf, w_co, b_i, b_f, b_c, b_o);
  }
};

/// LSTM without peepholes. The block input reads only x_t unless W_hc is
/// non-empty, in which case W_hc h_{t-1} is added.
struct FastLstmCell {
  Matrix W_xi, W_hi, W_xf, W_hf, W_xc, W_xo, W_ho;
  Vector b_i, b_f, b_c, b_o;
  Matrix W_hc;

  static FastLstmCell random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init = {},
                             bool recurrent_block_input = false);

  bool recurrent_block_input() const { return !W_hc.empty(); }
  std::size_t input_size() const { return W_xi.cols(); }
  std::size_t hidden_size() const { return W_hi.rows(); }
  std::size_t output_size() const { return hidden_size(); }
  void validate() const;

  static constexpr std::array<std::string_view, 12> tensor_names{
      "W_xi", "W_hi", "W_xf", "W_hf", "W_xc", "W_xo", "W_ho", "b_i", "b_f", "b_c", "b_o", "W_hc"};
  auto tensors() { return std::tie(W_xi, W_hi, W_xf, W_hf, W_xc, W_xo, W_ho, b_i, b_f, b_c, b_o, W_hc); }
  auto tensors() const { return std::tie(W_xi, W_hi, W_xf, W_hf, W_xc, W_xo, W_ho, b_i, b_f, b_c, b_o, W_hc); }
};

/// r = σ(W_r u + U_r h), z = σ(W_z u + U_z h), h̄ = tanh(W u + U (r ⊙ h)),
/// h' = z ⊙ h + (1 - z) ⊙ h̄. No bias terms.
struct GruCell {
  Matrix W_r, U_r, W_z, U_z, W, U;

  static GruCell random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init = {});

  std::size_t input_size() const { return W_r.cols(); }
  std::size_t hidden_size() const { return U_r.rows(); }
  std::size_t output_size() const { return hidden_size(); }
  void validate() const;

  static constexpr std::array<std::string_view, 6> tensor_names{"W_r", "U_r", "W_z", "U_z", "W", "U"};
  auto tensors() { return std::tie(W_r, U_r, W_z, U_z, W, U); }
  auto tensors() const { return std::tie(W_r, U_r, W_z, U_z, W, U); }
};

/// Calls f(name, span) for each parameter tensor of a cell, in declaration order.
template <class CellT, class F>
void for_each_tensor(CellT& cell, F&& f) {
  auto t = cell.tensors();
  constexpr auto& names = std::remove_cvref_t<CellT>::tensor_names;
  [&]<std::size_t... I>(std::index_sequence<I...>) {
    (f(names[I], as_span(std::get<I>(t))), ...);
  }(std::make_index_sequence<names.size()>{});
}

template <class CellT>
std::size_t param_count(const CellT& cell) {
  std::size_t n = 0;
  for_each_tensor(cell, [&](std::string_view, std::span<const double> s) { n += s.size(); });
  return n;
}

template <class CellT>
void fill_params(CellT& cell, double value) {
  for_each_tensor(cell, [&](std::string_view, std::span<double> s) {
    for (double& v : s) v = value;
  });
}

// Public single-step API.

Vector dense_forward(const DenseLayer& layer, std::span<const double> x);

struct RnnStep {
  Vector h;
  Vector y;
};
RnnStep rnn_step(const RnnCell& cell, std::span<const double> u, std::span<const double> h_prev);

struct LstmStep {
  CellState state;
  Vector h;
};
LstmStep lstm_step(const LstmCell& cell, std::span<const double> u, const CellState& state);
LstmStep fast_lstm_step(const FastLstmCell& cell, std::span<const double> x, const CellState& state);

Vector gru_step(const GruCell& cell, std::span<const double> u, std::span<const double> h_prev);

/// Inverted dropout. In training mode each element is zeroed with
/// probability p and survivors are scaled by 1/(1-p); otherwise identity.
Vector apply_dropout(std::span<const double> x, double p, SeededRng& rng, bool training);

/// Draws the multiplier vector apply_dropout would use.
Vector dropout_mask(std::size_t n, double p, SeededRng& rng);

// Tape-recording forward step: advances state, returns the layer output
// and fills *tape when non-null.

Vector step_forward(const DenseLayer& cell, std::span<const double> x, CellState& state, TapeStep* tape);
Vector step_forward(const RnnCell& cell, std::span<const double> x, CellState& state, TapeStep* tape);
Vector step_forward(const LstmCell& cell, std::span<const double> x, CellState& state, TapeStep* tape);
Vector step_forward(const FastLstmCell& cell, std::span<const double> x, CellState& state, TapeStep* tape);
Vector step_forward(const GruCell& cell, std::span<const double> x, CellState& state, TapeStep* tape);

// Backward step: d_out is the loss gradient w.r.t. this step's output,
// carry holds gradients from step t+1 on entry and for step t-1 on exit.
// Parameter gradients are added into grads. Returns the gradient w.r.t. x.

Vector step_backward(const DenseLayer& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, DenseLayer& grads);
Vector step_backward(const RnnCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, RnnCell& grads);
Vector step_backward(const LstmCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, LstmCell& grads);
Vector step_backward(const FastLstmCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, FastLstmCell& grads);
Vector step_backward(const GruCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, GruCell& grads);

CellState zero_state(const DenseLayer&);
CellState zero_state(const RnnCell& cell);
CellState zero_state(const LstmCell& cell);
CellState zero_state(const FastLstmCell& cell);
CellState zero_state(const GruCell& cell);

}  // namespace sidnn
