#include "sidnn/loss.hpp"

#include "sidnn/errors.hpp"

namespace sidnn {

double squared_error(std::span<const Vector> yhat, std::span<const Vector> y) {
  if (yhat.size() != y.size()) {
    throw ShapeError("mse_loss: " + std::to_string(yhat.size()) + " predictions for " + std::to_string(y.size()) +
                     " targets");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (yhat[k].size() != y[k].size()) {
      throw ShapeError("mse_loss: sample " + std::to_string(k) + " has " + std::to_string(yhat[k].size()) +
                       " predicted channels and " + std::to_string(y[k].size()) + " target channels");
    }
    for (std::size_t i = 0; i < y[k].size(); ++i) {
      const double e = yhat[k][i] - y[k][i];
      sum += e * e;
    }
  }
  return sum;
}

double mse_loss(std::span<const Vector> yhat, std::span<const Vector> y) {
  const double sum = squared_error(yhat, y);
  if (y.empty()) return 0.0;
  return sum / (2.0 * static_cast<double>(y.size()));
}

}  // namespace sidnn
