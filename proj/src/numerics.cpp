#include "sidnn/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "sidnn/errors.hpp"
#include "sidnn/kernels.hpp"

namespace sidnn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
                     std::to_string(data_.size()) + " values");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

std::string shape_of(std::span<const double> v) { return "[" + std::to_string(v.size()) + "]"; }

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "linear" || name == "identity") return Activation::linear;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
  }
  return "linear";
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double tanh(double x) { return std::tanh(x); }

double relu(double x) { return x > 0.0 ? x : 0.0; }

double activate(Activation a, double x) {
  switch (a) {
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return relu(x);
    case Activation::linear: return x;
  }
  return x;
}

double activation_derivative(Activation a, double input, double output) {
  switch (a) {
    case Activation::sigmoid: return output * (1.0 - output);
    case Activation::tanh: return 1.0 - output * output;
    case Activation::relu: return input > 0.0 ? 1.0 : 0.0;
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

namespace {
template <class F>
Vector map(std::span<const double> x, F f) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), f);
  return out;
}
}  // namespace

Vector sigmoid(std::span<const double> x) { return map(x, [](double v) { return sigmoid(v); }); }
Vector tanh(std::span<const double> x) { return map(x, [](double v) { return std::tanh(v); }); }
Vector relu(std::span<const double> x) { return map(x, [](double v) { return relu(v); }); }
Vector activate(Activation a, std::span<const double> x) {
  return map(x, [a](double v) { return activate(a, v); });
}

Vector affine(const Matrix& W, std::span<const double> x, std::span<const double> b) {
  if (W.cols() != x.size() || W.rows() != b.size()) {
    throw ShapeError("affine: W is " + W.shape() + ", x is " + shape_of(x) + ", b is " + shape_of(b));
  }
  Vector y(W.rows());
  kernels::affine(W, x, b, y);
  return y;
}

Matrix init_uniform(std::size_t rows, std::size_t cols, double scale, SeededRng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("init_uniform: scale must be positive, got " + std::to_string(scale));
  }
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

Vector init_uniform(std::size_t len, double scale, SeededRng& rng) {
  Matrix m = init_uniform(len, 1, scale, rng);
  return Vector(m.values().begin(), m.values().end());
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace sidnn
