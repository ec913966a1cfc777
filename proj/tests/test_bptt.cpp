#include <doctest.h>

#include <cmath>

#include "sidnn/errors.hpp"
#include "sidnn/gradcheck.hpp"
#include "sidnn/stack.hpp"
#include "support/oracles.hpp"

using namespace sidnn;

namespace {

constexpr CellFamily kFamilies[] = {CellFamily::dense, CellFamily::rnn, CellFamily::lstm, CellFamily::fastlstm,
                                    CellFamily::gru};

constexpr double kFloor = GradCheckOptions{}.floor;
// The truncated oracle adds one difference quotient per injection step, and
// each carries its own rounding.
constexpr double kSummedFloor = 1e-4;

CellStack single(const Cell& cell) {
  CellStack s;
  s.layers.push_back({cell, 0.0});
  return s;
}

CellStack mixed_stack(SeededRng& rng) {
  CellStack s;
  s.layers.push_back({random_cell(CellFamily::gru, 2, 3, rng), 0.0});
  s.layers.push_back({random_cell(CellFamily::lstm, 3, 2, rng), 0.0});
  s.layers.push_back({random_cell(CellFamily::rnn, 2, 2, rng), 0.0});
  s.layers.push_back({random_cell(CellFamily::dense, 2, 1, rng), 0.0});
  return s;
}

}  // namespace

TEST_CASE("untruncated gradients match finite differences for every family") {
  for (CellFamily family : kFamilies) {
    for (std::size_t hidden : {1, 2, 4}) {
      for (std::size_t len : {1, 3, 6}) {
        for (std::uint64_t seed = 1; seed <= 2; ++seed) {
          GradCheckOptions options;
          options.floor = kFloor;
          const GradCheckResult r = check_family(family, hidden, len, seed, options);
          CAPTURE(to_string(family));
          CAPTURE(hidden);
          CAPTURE(len);
          CAPTURE(r.worst.tensor);
          CHECK(r.max_rel_error <= 1e-5);
        }
      }
    }
  }
}

TEST_CASE("truncated BPTT equals the detached-history oracle") {
  SeededRng rng(404);
  for (CellFamily family : kFamilies) {
    const CellStack stack = single(random_cell(family, 2, 3, rng));
    const std::size_t out = stack.output_size();
    const auto u = oracle::random_sequence(6, 2, rng);
    const auto g = oracle::random_sequence(6, out, rng);
    for (std::size_t q : {1, 2, 3, 5}) {
      CAPTURE(to_string(family));
      CAPTURE(q);
      const Vector analytic = oracle::analytic_gradient(stack, u, g, q);
      const Vector numeric = oracle::truncated_fd_gradient(stack, u, g, q);
      CHECK(oracle::max_rel_error(analytic, numeric, kSummedFloor) <= 1e-5);
    }
  }
}

TEST_CASE("truncated BPTT through a mixed stack") {
  SeededRng rng(9);
  const CellStack stack = mixed_stack(rng);
  const auto u = oracle::random_sequence(7, 2, rng);
  const auto g = oracle::random_sequence(7, 1, rng);
  for (std::size_t q : {2, 4, 7}) {
    CAPTURE(q);
    CHECK(oracle::max_rel_error(oracle::analytic_gradient(stack, u, g, q),
                                oracle::truncated_fd_gradient(stack, u, g, q), kSummedFloor) <= 1e-5);
  }
}

TEST_CASE("both output peephole placements differentiate correctly") {
  SeededRng rng(61);
  for (OutputPeephole placement : {OutputPeephole::current_cell, OutputPeephole::previous_cell}) {
    Cell cell = random_cell(CellFamily::lstm, 2, 3, rng);
    std::get<LstmCell>(cell).output_peephole = placement;
    const CellStack stack = single(cell);
    const auto u = oracle::random_sequence(5, 2, rng);
    const auto g = oracle::random_sequence(5, 3, rng);
    CHECK(oracle::max_rel_error(oracle::analytic_gradient(stack, u, g, 5),
                                oracle::truncated_fd_gradient(stack, u, g, 5), kSummedFloor) <= 1e-5);
  }
}

TEST_CASE("truncation actually truncates") {
  SeededRng rng(12);
  const CellStack stack = single(random_cell(CellFamily::rnn, 2, 3, rng));
  const auto u = oracle::random_sequence(6, 2, rng);
  const auto g = oracle::random_sequence(6, 2, rng);
  const Vector full = oracle::analytic_gradient(stack, u, g, 6);
  CHECK(oracle::analytic_gradient(stack, u, g, 100) == full);
  CHECK(oracle::max_rel_error(oracle::analytic_gradient(stack, u, g, 2), full) > 1e-3);
}

TEST_CASE("cell_backward edge cases") {
  SeededRng rng(21);
  const Cell cell = random_cell(CellFamily::lstm, 2, 2, rng);
  const auto u = oracle::random_sequence(1, 2, rng);
  const auto g = oracle::random_sequence(1, 2, rng);
  std::vector<TapeStep> tape(1);
  CellState state = zero_state(std::get<LstmCell>(cell));
  step_forward(std::get<LstmCell>(cell), u[0], state, &tape[0]);

  const Cell q1 = cell_backward(cell, tape, g, 1);
  const Cell full = cell_backward(cell, tape, g, 50);
  CHECK(oracle::flatten(single(q1)) == oracle::flatten(single(full)));

  const std::vector<Vector> zeros(1, Vector(2, 0.0));
  for (double v : oracle::flatten(single(cell_backward(cell, tape, zeros, 3)))) CHECK(v == 0.0);

  CHECK_THROWS_AS(cell_backward(cell, std::vector<TapeStep>{}, std::vector<Vector>{}, 1), StateError);
  CHECK_THROWS_AS(cell_backward(cell, tape, g, 0), ConfigError);
  CHECK_THROWS_AS(cell_backward(cell, tape, std::vector<Vector>(2, Vector(2)), 1), ShapeError);
}

TEST_CASE("gradients accumulate additively across calls") {
  SeededRng rng(30);
  const CellStack stack = single(random_cell(CellFamily::gru, 2, 2, rng));
  const auto u = oracle::random_sequence(4, 2, rng);
  const auto g = oracle::random_sequence(4, 2, rng);
  StackState state = zero_state(stack);
  StackTape tape;
  tape.steps.resize(4);
  for (std::size_t t = 0; t < 4; ++t) stack_step(stack, u[t], state, &tape.steps[t], nullptr);
  CellStack once = zeros_like(stack), twice = zeros_like(stack);
  stack_backward(stack, tape, g, 2, once);
  stack_backward(stack, tape, g, 2, twice);
  stack_backward(stack, tape, g, 2, twice);
  const Vector a = oracle::flatten(once), b = oracle::flatten(twice);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i] - 2.0 * a[i]) <= 1e-14 * std::abs(a[i]) + 1e-300);
}

TEST_CASE("dropout masks are replayed in the backward pass") {
  SeededRng rng(55);
  CellStack stack;
  stack.layers.push_back({random_cell(CellFamily::lstm, 1, 3, rng), 0.4});
  stack.layers.push_back({random_cell(CellFamily::dense, 3, 1, rng), 0.0});
  const auto u = oracle::random_sequence(5, 1, rng);
  const auto g = oracle::random_sequence(5, 1, rng);
  constexpr std::uint64_t mask_seed = 99;

  auto objective = [&](const CellStack& s) {
    SeededRng masks(mask_seed);
    StackState st = zero_state(s);
    double total = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) total += oracle::dot(g[t], stack_step(s, u[t], st, nullptr, &masks));
    return total;
  };

  SeededRng masks(mask_seed);
  StackState st = zero_state(stack);
  StackTape tape;
  tape.steps.resize(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) stack_step(stack, u[t], st, &tape.steps[t], &masks);
  CellStack grads = zeros_like(stack);
  stack_backward(stack, tape, g, u.size(), grads);
  const Vector analytic = oracle::flatten(grads);

  CellStack probe = stack;
  Vector numeric;
  for (auto span : oracle::spans(probe)) {
    for (std::size_t i = 0; i < span.size(); ++i) {
      const double saved = span[i];
      span[i] = saved + 1e-6;
      const double up = objective(probe);
      span[i] = saved - 1e-6;
      const double down = objective(probe);
      span[i] = saved;
      numeric.push_back((up - down) / 2e-6);
    }
  }
  CHECK(oracle::max_rel_error(analytic, numeric, kFloor) <= 1e-5);
}

TEST_CASE("forward and backward are deterministic") {
  SeededRng a(17), b(17);
  const CellStack s1 = mixed_stack(a), s2 = mixed_stack(b);
  SeededRng in(3);
  const auto u = oracle::random_sequence(6, 2, in);
  const auto g = oracle::random_sequence(6, 1, in);
  CHECK(oracle::analytic_gradient(s1, u, g, 3) == oracle::analytic_gradient(s2, u, g, 3));
  CHECK(oracle::weighted_outputs(s1, u, g) == oracle::weighted_outputs(s2, u, g));
}

TEST_CASE("gradcheck negative control") {
  GradCheckOptions corrupt;
  corrupt.corrupt = true;
  const GradCheckResult r = check_family(CellFamily::lstm, 2, 3, 1, corrupt);
  CHECK_FALSE(r.passed());
  CHECK(r.failures.front().tensor == "W_ui");
  CHECK(check_family(CellFamily::gru, 3, 4, 1).passed());
  CHECK(check_family(CellFamily::gru, 3, 4, 2).passed());
  CHECK_THROWS_AS(parse_cell_family("cnn"), ConfigError);
  CHECK(parse_cell_family("mlp") == CellFamily::dense);
}
