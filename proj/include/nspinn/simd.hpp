#pragma once

#include <cstddef>
#include <string_view>

namespace nspinn::simd {

enum class Isa { scalar, avx2, neon };

// Dense kernels on row-major double arrays. All variants compute the same
// quantities; vector variants may differ from scalar by reassociation only.
struct Kernels {
  // dot(x, y, n)
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + b  (W is rows x cols, b may be null)
  void (*gemv)(const double* W, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // y = W^T x
  void (*gemv_t)(const double* W, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
  // A += alpha * x y^T
  void (*ger)(double alpha, const double* x, const double* y, double* A,
              std::size_t rows, std::size_t cols);
};

const Kernels& scalar_kernels();
// Null when the variant was not compiled in.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

bool isa_available(Isa isa);
Isa detect_isa();
Isa active_isa();
// Returns false if the ISA is not available on this host.
bool set_isa(Isa isa);
const Kernels& kernels();
const Kernels& kernels_for(Isa isa);

std::string_view isa_name(Isa isa);
bool parse_isa(std::string_view s, Isa& out);

}  // namespace nspinn::simd
