#include "nspinn/simd.hpp"

namespace nspinn::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* W, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = W + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += w[c] * x[c];
    y[r] = b ? s + b[r] : s;
  }
}

void gemv_t_scalar(const double* W, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = W + r * cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += w[c] * xr;
  }
}

void ger_scalar(double alpha, const double* x, const double* y, double* A,
                std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* a = A + r * cols;
    const double s = alpha * x[r];
    for (std::size_t c = 0; c < cols; ++c) a[c] += s * y[c];
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{dot_scalar, axpy_scalar, gemv_scalar, gemv_t_scalar, ger_scalar};
  return k;
}

}  // namespace nspinn::simd
