#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sidnn/hammerstein.hpp"
#include "sidnn/numerics.hpp"

namespace sidnn {

/// Aligned input/output sequences.
struct Dataset {
  std::string name;
  std::vector<Vector> u;
  std::vector<Vector> y;

  std::size_t sample_count() const { return u.size(); }
  std::size_t n_inputs() const { return u.empty() ? 0 : u.front().size(); }
  std::size_t n_outputs() const { return y.empty() ? 0 : y.front().size(); }
  /// Throws if lengths or channel widths are inconsistent.
  void validate() const;
};

/// Assigns zero-based file columns to input and output channels.
struct ColumnMap {
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;

  /// DaISy glassfurnace: column 0 is the sample index, 1-3 inputs, 4-9 outputs.
  static ColumnMap glassfurnace();
  /// Inputs first, then outputs, no index column.
  static ColumnMap contiguous(std::size_t n_inputs, std::size_t n_outputs);
};

/// Whitespace-separated numeric columns, one sample per row. Blank lines and
/// lines starting with '#' or '%' are skipped.
Dataset load_daisy(const std::filesystem::path& path, std::size_t n_inputs, std::size_t n_outputs,
                   const ColumnMap& columns);

/// Number of fields on the first data row of a DaISy-style file.
std::size_t daisy_column_count(const std::filesystem::path& path);

/// Writes inputs then outputs per row with round-trip precision.
void write_daisy(const std::filesystem::path& path, const Dataset& data, const std::string& comment = {});

/// CSV with a header row; channels are selected by header name.
Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& input_columns,
                 const std::vector<std::string>& output_columns);

struct SplitDataset {
  Dataset train;
  Dataset test;
  double ratio = 0.0;
};

/// First floor(ratio * N) samples train, the rest test. Temporal order is kept.
SplitDataset split(const Dataset& data, double ratio);

/// Half-open sample range [begin, end).
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Contiguous windows of `size` samples (last may be short) in an order
/// shuffled deterministically by (seed, epoch).
std::vector<Window> minibatches(std::size_t sample_count, std::size_t size, std::uint64_t seed, std::uint64_t epoch);
std::vector<Window> minibatches(const Dataset& data, std::size_t size, std::uint64_t seed, std::uint64_t epoch);

/// Per-channel affine standardization fitted on one dataset.
struct Standardizer {
  Vector u_mean, u_std, y_mean, y_std;

  static Standardizer fit(const Dataset& data);
  Dataset apply(const Dataset& data) const;
  std::vector<Vector> restore_outputs(const std::vector<Vector>& y) const;
  bool empty() const { return u_mean.empty(); }
};

enum class Nonlinearity { identity, tanh, cubic, saturation };
enum class InputKind { prbs, gaussian };

Nonlinearity parse_nonlinearity(std::string_view name);
std::string_view to_string(Nonlinearity n);
InputKind parse_input_kind(std::string_view name);
std::string_view to_string(InputKind k);
double apply_nonlinearity(Nonlinearity n, double x);

struct SyntheticSpec {
  Nonlinearity nonlinearity = Nonlinearity::tanh;
  Vector a{-0.7};
  Vector b{0.3};
  NoiseSpec noise;
  InputKind input_kind = InputKind::prbs;
  /// Number of samples each PRBS level is held.
  std::size_t prbs_hold = 1;
  /// Standard deviation of the gaussian input.
  double input_std = 1.0;
  std::uint64_t seed = 11;

  /// Rejects unstable A and malformed fields.
  void validate() const;
};

struct GroundTruth {
  SyntheticSpec spec;
  /// Noise-free output.
  std::vector<Vector> clean_y;
};

/// Two-level +-1 sequence from a 31-bit maximal-length LFSR (x^31 + x^28 + 1).
Vector prbs(std::size_t n, std::uint64_t seed, std::size_t hold = 1);

/// Simulates y(n) = B/A g(u(n)) + mu(n) from zero initial conditions.
std::pair<Dataset, GroundTruth> gen_synthetic(const SyntheticSpec& spec, std::size_t n);

}  // namespace sidnn
