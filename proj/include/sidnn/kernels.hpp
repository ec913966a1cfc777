#pragma once

// Dense kernels used by every cell. Each has a serial reference and an
// OpenMP version; both perform the same floating-point operations per
// output element in the same order, so their results are bit-identical.

#include <cstddef>
#include <span>

#include "sidnn/numerics.hpp"

namespace sidnn::kernels {

namespace serial {
/// y = W x + b (b may be empty, meaning zero).
void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y);
/// y += W x
void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y);
/// dx += W^T dy
void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx);
/// dW += dy x^T
void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW);
}  // namespace serial

namespace parallel {
void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y);
void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y);
void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx);
void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW);
}  // namespace parallel

/// Matrices with fewer entries than this run the serial path.
inline constexpr std::size_t kParallelThreshold = 8192;

bool openmp_enabled();
int max_threads();

// Dispatching entry points used by the rest of the library.
void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y);
void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y);
void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx);
void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW);

}  // namespace sidnn::kernels
