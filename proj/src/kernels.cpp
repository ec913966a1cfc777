#include "sidnn/kernels.hpp"

#include <algorithm>
#include <cassert>

#ifdef SIDNN_HAVE_OPENMP
#include <omp.h>
#endif

namespace sidnn::kernels {

namespace serial {

void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  const std::size_t rows = W.rows(), cols = W.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* w = W.row(i).data();
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
    y[i] = b.empty() ? s : s + b[i];
  }
}

void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = W.rows(), cols = W.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* w = W.row(i).data();
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
    y[i] += s;
  }
}

void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx) {
  const std::size_t rows = W.rows(), cols = W.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* w = W.row(i).data();
    const double g = dy[i];
    for (std::size_t j = 0; j < cols; ++j) dx[j] += w[j] * g;
  }
}

void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW) {
  const std::size_t rows = dW.rows(), cols = dW.cols();
  double* out = dW.values().data();
  for (std::size_t i = 0; i < rows; ++i) {
    const double g = dy[i];
    double* row = out + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += g * x[j];
  }
}

}  // namespace serial

namespace parallel {

#ifdef SIDNN_HAVE_OPENMP

void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(W.rows());
  const std::size_t cols = W.cols();
  const double* base = W.values().data();
  const bool has_bias = !b.empty();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* w = base + static_cast<std::size_t>(i) * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
    y[i] = has_bias ? s + b[i] : s;
  }
}

void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(W.rows());
  const std::size_t cols = W.cols();
  const double* base = W.values().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* w = base + static_cast<std::size_t>(i) * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
    y[i] += s;
  }
}

void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx) {
  // Columns are split across threads; each thread walks every row for its
  // own column block, so per-element accumulation order matches serial.
  const std::size_t rows = W.rows(), cols = W.cols();
  const double* base = W.values().data();
#pragma omp parallel
  {
    const std::size_t nthreads = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t chunk = (cols + nthreads - 1) / nthreads;
    const std::size_t lo = std::min(cols, tid * chunk);
    const std::size_t hi = std::min(cols, lo + chunk);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* w = base + i * cols;
      const double g = dy[i];
      for (std::size_t j = lo; j < hi; ++j) dx[j] += w[j] * g;
    }
  }
}

void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(dW.rows());
  const std::size_t cols = dW.cols();
  double* out = dW.values().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double g = dy[i];
    double* row = out + static_cast<std::size_t>(i) * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += g * x[j];
  }
}

#else

void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  serial::affine(W, x, b, y);
}
void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y) { serial::gemv_acc(W, x, y); }
void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx) {
  serial::gemv_t_acc(W, dy, dx);
}
void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW) {
  serial::outer_acc(dy, x, dW);
}

#endif

}  // namespace parallel

bool openmp_enabled() {
#ifdef SIDNN_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef SIDNN_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {
bool use_parallel(const Matrix& W) { return W.size() >= kParallelThreshold && max_threads() > 1; }
}  // namespace

void affine(const Matrix& W, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  assert(x.size() == W.cols() && y.size() == W.rows());
  if (use_parallel(W)) parallel::affine(W, x, b, y);
  else serial::affine(W, x, b, y);
}

void gemv_acc(const Matrix& W, std::span<const double> x, std::span<double> y) {
  assert(x.size() == W.cols() && y.size() == W.rows());
  if (use_parallel(W)) parallel::gemv_acc(W, x, y);
  else serial::gemv_acc(W, x, y);
}

void gemv_t_acc(const Matrix& W, std::span<const double> dy, std::span<double> dx) {
  assert(dy.size() == W.rows() && dx.size() == W.cols());
  if (use_parallel(W)) parallel::gemv_t_acc(W, dy, dx);
  else serial::gemv_t_acc(W, dy, dx);
}

void outer_acc(std::span<const double> dy, std::span<const double> x, Matrix& dW) {
  assert(dy.size() == dW.rows() && x.size() == dW.cols());
  if (use_parallel(dW)) parallel::outer_acc(dy, x, dW);
  else serial::outer_acc(dy, x, dW);
}

}  // namespace sidnn::kernels
