#include "nspinn/simd.hpp"

#include <atomic>
#include <cstdlib>

namespace nspinn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("NSPINN_ISA")) {
    Isa forced;
    if (parse_isa(env, forced) && isa_available(forced)) return forced;
  }
  return detect_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return avx2_kernels() != nullptr && cpu_has_avx2();
    case Isa::neon: return neon_kernels() != nullptr;
  }
  return false;
}

Isa detect_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  active().store(isa, std::memory_order_relaxed);
  return true;
}

const Kernels& kernels_for(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      if (auto* k = avx2_kernels()) return *k;
      break;
    case Isa::neon:
      if (auto* k = neon_kernels()) return *k;
      break;
    case Isa::scalar: break;
  }
  return scalar_kernels();
}

const Kernels& kernels() { return kernels_for(active_isa()); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool parse_isa(std::string_view s, Isa& out) {
  if (s == "scalar") out = Isa::scalar;
  else if (s == "avx2") out = Isa::avx2;
  else if (s == "neon") out = Isa::neon;
  else return false;
  return true;
}

}  // namespace nspinn::simd
