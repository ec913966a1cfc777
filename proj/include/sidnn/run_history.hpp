#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace sidnn {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  /// Per-channel fit% on the validation split.
  std::vector<double> val_fit;
  /// Mean of val_fit.
  double fit_pct = 0.0;
  /// Wall-clock seconds since the start of training.
  double seconds = 0.0;
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  double total_seconds = 0.0;

  /// Header: epoch,train_mse,val_mse,fit_pct,seconds. With include_timing
  /// false the seconds column is written as 0 so the file depends only on
  /// the configuration and seed.
  void write_csv(const std::filesystem::path& path, bool include_timing) const;
};

}  // namespace sidnn
