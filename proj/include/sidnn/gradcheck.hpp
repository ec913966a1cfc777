#pragma once

// Finite-difference verification of the hand-derived cell gradients.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sidnn/stack.hpp"

namespace sidnn {

enum class CellFamily { dense, rnn, lstm, fastlstm, gru };

/// Accepts dense (alias mlp), rnn, lstm, fastlstm, gru.
CellFamily parse_cell_family(std::string_view name);
std::string_view to_string(CellFamily family);

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-5;
  /// Lower bound on the relative-error denominator. Central differences at
  /// step 1e-6 carry about 1e-11 of rounding, so entries below the floor are
  /// effectively compared in absolute terms (tolerance * floor).
  double floor = 1e-5;
  /// Test hook: perturbs one analytic entry so the check must fail.
  bool corrupt = false;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckResult {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  /// Entries whose relative error exceeds the tolerance.
  std::vector<GradCheckEntry> failures;
  bool passed() const { return failures.empty(); }
};

double relative_error(double analytic, double numeric, double floor);

/// A cell of the family with random parameters. The RNN output width is 2,
/// the dense layer maps in -> hidden with tanh.
Cell random_cell(CellFamily family, std::size_t in, std::size_t hidden, SeededRng& rng);

/// Compares cell_backward against central differences of
/// L = sum_t <g_t, output_t> for the given input sequence.
GradCheckResult check_cell(const Cell& cell, const std::vector<Vector>& inputs, const std::vector<Vector>& output_grads,
                           const GradCheckOptions& options = {});

/// Random cell, inputs and output weights drawn from seed.
GradCheckResult check_family(CellFamily family, std::size_t hidden, std::size_t seq_len, std::uint64_t seed,
                             const GradCheckOptions& options = {});

}  // namespace sidnn
