#pragma once

#include <span>

#include "sidnn/numerics.hpp"

namespace sidnn {

/// l = 1/(2n) * sum_k sum_i (yhat_i(k) - y_i(k))^2 with n the number of samples.
double mse_loss(std::span<const Vector> yhat, std::span<const Vector> y);

/// Sum of squared errors without the 1/(2n) scaling.
double squared_error(std::span<const Vector> yhat, std::span<const Vector> y);

}  // namespace sidnn
