#include "nspinn/simd.hpp"

#if defined(__ARM_NEON) && defined(__aarch64__)
#include <arm_neon.h>

namespace nspinn::simd {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* W, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot_neon(W + r * cols, x, cols);
    y[r] = b ? s + b[r] : s;
  }
}

void gemv_t_neon(const double* W, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(x[r], W + r * cols, y, cols);
}

void ger_neon(double alpha, const double* x, const double* y, double* A,
              std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(alpha * x[r], y, A + r * cols, cols);
}

}  // namespace

const Kernels* neon_kernels() {
  static const Kernels k{dot_neon, axpy_neon, gemv_neon, gemv_t_neon, ger_neon};
  return &k;
}

}  // namespace nspinn::simd

#else

namespace nspinn::simd {
const Kernels* neon_kernels() { return nullptr; }
}  // namespace nspinn::simd

#endif
