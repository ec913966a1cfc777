#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sidnn/rng.hpp"

namespace sidnn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::string shape() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { sigmoid, tanh, relu, linear };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

double sigmoid(double x);
double tanh(double x);
double relu(double x);
double activate(Activation a, double x);

/// Derivative of the activation, expressed through its input and output.
double activation_derivative(Activation a, double input, double output);

Vector sigmoid(std::span<const double> x);
Vector tanh(std::span<const double> x);
Vector relu(std::span<const double> x);
Vector activate(Activation a, std::span<const double> x);

/// W x + b.
Vector affine(const Matrix& W, std::span<const double> x, std::span<const double> b);

/// Entries i.i.d. uniform in [-scale, scale].
Matrix init_uniform(std::size_t rows, std::size_t cols, double scale, SeededRng& rng);
Vector init_uniform(std::size_t len, double scale, SeededRng& rng);

bool all_finite(std::span<const double> values);

std::string shape_of(std::span<const double> v);

}  // namespace sidnn
