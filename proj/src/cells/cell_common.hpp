#pragma once

#include <span>
#include <string>

#include "sidnn/errors.hpp"
#include "sidnn/numerics.hpp"

namespace sidnn::detail {

inline void expect_len(std::span<const double> v, std::size_t n, const char* what, const char* cell) {
  if (v.size() != n) {
    throw ShapeError(std::string(cell) + ": " + what + " has length " + std::to_string(v.size()) +
                     ", expected " + std::to_string(n));
  }
}

inline void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what,
                         const char* cell) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(cell) + ": " + what + " is " + m.shape() + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

inline void add_to(std::span<double> acc, std::span<const double> v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

inline Vector ensure(const Vector& v, std::size_t n) { return v.empty() ? Vector(n, 0.0) : v; }

}  // namespace sidnn::detail
