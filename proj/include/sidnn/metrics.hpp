#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sidnn/data.hpp"
#include "sidnn/hammerstein.hpp"
#include "sidnn/run_history.hpp"

namespace sidnn {

/// Fit(%) = (1 - ||y - yhat|| / ||y - mean(y)||) * 100 per output channel.
std::vector<double> fit_percent(std::span<const Vector> y, std::span<const Vector> yhat);

/// Unweighted mean over channels.
double aggregate_fit(std::span<const double> channel_fit);

/// Free-running simulation of the model over the dataset from zero state,
/// dropout disabled. The model itself is not modified.
std::vector<Vector> predict(const HammersteinModel& model, const Dataset& data);

struct EvalReport {
  std::vector<double> channel_fit;
  double fit = 0.0;
  double mse = 0.0;
  std::size_t sample_count = 0;
  double wall_clock_seconds = 0.0;
};

EvalReport evaluate(const HammersteinModel& model, const Dataset& data);

/// evaluate() plus the training wall-clock taken from the history.
EvalReport build_report(const HammersteinModel& model, const Dataset& data, const RunHistory& history);

nlohmann::json to_json(const EvalReport& report, bool include_timing = true);

/// Renders rows as a fixed-width text table with columns
/// Model | Estimation Fit (%) | Training Time | MSE.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace sidnn
