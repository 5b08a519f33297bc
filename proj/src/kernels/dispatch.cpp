#include <atomic>
#include <cstdlib>
#include <cstring>

#include "orbitlab/error.hpp"
#include "orbitlab/kernels.hpp"

namespace orbitlab::kernels {

namespace {

bool cpu_has(const char* feature) {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (std::strcmp(feature, "avx2") == 0)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (std::strcmp(feature, "avx512f") == 0) return __builtin_cpu_supports("avx512f");
#endif
  (void)feature;
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("ORBITLAB_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && isa_supported(Isa::Avx2)) return Isa::Avx2;
    if (std::strcmp(env, "avx512") == 0 && isa_supported(Isa::Avx512)) return Isa::Avx512;
  }
  return best_isa();
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(initial_isa())};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(ORBITLAB_HAVE_AVX2)
      return cpu_has("avx2");
#else
      return false;
#endif
    case Isa::Avx512:
#if defined(ORBITLAB_HAVE_AVX512)
      return cpu_has("avx512f");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() {
  if (isa_supported(Isa::Avx512)) return Isa::Avx512;
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  return Isa::Scalar;
}

Isa active_isa() { return static_cast<Isa>(active_slot().load()); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw ParameterError("isa " + isa_name(isa) + " not supported on this cpu");
  active_slot().store(static_cast<int>(isa));
}

AccumulateFn accumulate_for(Isa isa) {
  if (!isa_supported(isa)) throw ParameterError("isa " + isa_name(isa) + " not supported on this cpu");
  switch (isa) {
    case Isa::Avx512:
      return &accumulate_avx512;
    case Isa::Avx2:
      return &accumulate_avx2;
    case Isa::Scalar:
      break;
  }
  return &accumulate_scalar;
}

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx512:
      return "avx512";
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

}  // namespace orbitlab::kernels
