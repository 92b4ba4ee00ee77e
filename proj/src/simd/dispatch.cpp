#include <cstdlib>
#include <string>

#include "forge/simd/kernels.hpp"

namespace forge::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
    case Isa::Avx2:
#if defined(FORGE_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &detail::kAvx2Table;
#endif
      return nullptr;
    case Isa::Neon:
#if defined(FORGE_HAVE_NEON)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("FORGE_SIMD")) {
    if (std::string(forced) == "scalar") return detail::kScalarTable;
  }
  if (const KernelTable* t = table_for(Isa::Avx2)) return *t;
  if (const KernelTable* t = table_for(Isa::Neon)) return *t;
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace forge::simd
