#include "mpcm/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "mpcm/errors.hpp"

namespace mpcm::kernels {

namespace {

Isa isa_from_env(Isa fallback) {
  const char* env = std::getenv("MPCM_ISA");
  if (env == nullptr || *env == '\0') return fallback;
  if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
  if (std::strcmp(env, "avx2") == 0) return Isa::avx2;
  if (std::strcmp(env, "neon") == 0) return Isa::neon;
  return fallback;
}

Isa g_active = [] {
  Isa isa = isa_from_env(detect_best_isa());
  return isa_supported(isa) ? isa : Isa::scalar;
}();

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return detail::avx2_f64 != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
      return detail::neon_f64 != nullptr;
  }
  return false;
}

Isa detect_best_isa() {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return g_active; }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa))
    throw InvalidInputError(std::string("kernel isa not supported on this host: ") + isa_name(isa));
  g_active = isa;
}

template <>
const Kernels<double>& table<double>(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      if (detail::avx2_f64) return *detail::avx2_f64;
      break;
    case Isa::neon:
      if (detail::neon_f64) return *detail::neon_f64;
      break;
    case Isa::scalar:
      break;
  }
  return detail::scalar_f64;
}

template <>
const Kernels<float>& table<float>(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      if (detail::avx2_f32) return *detail::avx2_f32;
      break;
    case Isa::neon:
      if (detail::neon_f32) return *detail::neon_f32;
      break;
    case Isa::scalar:
      break;
  }
  return detail::scalar_f32;
}

template <>
const Kernels<double>& active<double>() {
  return table<double>(g_active);
}

template <>
const Kernels<float>& active<float>() {
  return table<float>(g_active);
}

}  // namespace mpcm::kernels
