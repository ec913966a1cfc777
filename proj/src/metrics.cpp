#include "sidnn/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sidnn/errors.hpp"
#include "sidnn/loss.hpp"

namespace sidnn {

std::vector<double> fit_percent(std::span<const Vector> y, std::span<const Vector> yhat) {
  if (y.size() != yhat.size()) throw ShapeError("fit_percent: sequences differ in length");
  if (y.empty()) throw StateError("fit_percent: empty sequence");
  const std::size_t channels = y.front().size();
  std::vector<double> fits(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (const auto& v : y) mean += v[c];
    mean /= static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (yhat[k].size() != channels || y[k].size() != channels) throw ShapeError("fit_percent: channel mismatch");
      const double e = y[k][c] - yhat[k][c];
      const double d = y[k][c] - mean;
      num += e * e;
      den += d * d;
    }
    if (den == 0.0) throw UndefinedFitError(c);
    fits[c] = (1.0 - std::sqrt(num) / std::sqrt(den)) * 100.0;
  }
  return fits;
}

double aggregate_fit(std::span<const double> channel_fit) {
  if (channel_fit.empty()) return 0.0;
  return std::accumulate(channel_fit.begin(), channel_fit.end(), 0.0) / static_cast<double>(channel_fit.size());
}

std::vector<Vector> predict(const HammersteinModel& model, const Dataset& data) {
  if (data.n_inputs() != model.input_size()) {
    throw ShapeError("model expects " + std::to_string(model.input_size()) + " inputs, dataset '" + data.name +
                     "' has " + std::to_string(data.n_inputs()));
  }
  HammersteinModel copy = model;
  return hammerstein_forward(copy, data.u);
}

EvalReport evaluate(const HammersteinModel& model, const Dataset& data) {
  if (data.n_outputs() != model.output_size()) {
    throw ShapeError("model produces " + std::to_string(model.output_size()) + " outputs, dataset '" + data.name +
                     "' has " + std::to_string(data.n_outputs()));
  }
  const auto yhat = predict(model, data);
  EvalReport r;
  r.channel_fit = fit_percent(data.y, yhat);
  r.fit = aggregate_fit(r.channel_fit);
  r.mse = mse_loss(yhat, data.y);
  r.sample_count = data.sample_count();
  return r;
}

EvalReport build_report(const HammersteinModel& model, const Dataset& data, const RunHistory& history) {
  EvalReport r = evaluate(model, data);
  r.wall_clock_seconds = history.total_seconds;
  return r;
}

nlohmann::json to_json(const EvalReport& report, bool include_timing) {
  nlohmann::json j;
  j["channel_fit"] = report.channel_fit;
  j["fit"] = report.fit;
  j["mse"] = report.mse;
  j["sample_count"] = report.sample_count;
  if (include_timing) j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "| %-20s | %-18s | %-13s | %-12s |\n", "Model", "Estimation Fit (%)",
                "Training Time", "MSE");
  const std::string rule = "+" + std::string(22, '-') + "+" + std::string(20, '-') + "+" + std::string(15, '-') +
                           "+" + std::string(14, '-') + "+\n";
  out << rule << line << rule;
  for (const auto& [name, r] : rows) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.2fs", r.wall_clock_seconds);
    std::snprintf(line, sizeof line, "| %-20s | %18.4f | %13s | %12.6g |\n", name.c_str(), r.fit, seconds, r.mse);
    out << line;
  }
  out << rule;
  return out.str();
}

void RunHistory::write_csv(const std::filesystem::path& path, bool include_timing) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "epoch,train_mse,val_mse,fit_pct,seconds\n";
  char line[256];
  for (const auto& e : epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.6f\n", e.epoch, e.train_mse, e.val_mse, e.fit_pct,
                  include_timing ? e.seconds : 0.0);
    out << line;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace sidnn
