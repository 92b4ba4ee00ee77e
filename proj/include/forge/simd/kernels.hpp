#pragma once
// Data-parallel inner loops used by the text and metric stages.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is
// picked once at first use from the running CPU's capabilities; setting
// FORGE_SIMD=scalar in the environment pins the scalar path.
//
// All variants are required to return bit-identical results. For `sum_f64`
// that is achieved by fixing the reduction tree: four interleaved partial sums
// (element i goes to lane i % 4), combined as (l0 + l1) + (l2 + l3), then the
// tail added in order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace forge::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // Number of UTF-8 code points (bytes that are not 10xxxxxx continuations).
  std::size_t (*utf8_length)(std::string_view text);
  // Number of maximal runs of non-whitespace bytes. Whitespace is the ASCII
  // set {' ', '\t', '\n', '\v', '\f', '\r'}.
  std::size_t (*count_word_runs)(std::string_view text);
  // Appends the offset of every occurrence of `needle` to `out`, ascending.
  void (*find_byte)(std::string_view text, char needle, std::vector<std::size_t>& out);
  double (*sum_f64)(std::span<const double> values);
};

// Table for the best ISA available on this machine (honours FORGE_SIMD).
const KernelTable& active();

// Table for a specific ISA, or nullptr when it is not compiled in or the CPU
// lacks it. Used by equivalence tests.
const KernelTable* table_for(Isa isa);

inline std::size_t utf8_length(std::string_view text) { return active().utf8_length(text); }
inline std::size_t count_word_runs(std::string_view text) { return active().count_word_runs(text); }
inline std::vector<std::size_t> find_byte(std::string_view text, char needle) {
  std::vector<std::size_t> out;
  active().find_byte(text, needle, out);
  return out;
}
inline double sum_f64(std::span<const double> values) { return active().sum_f64(values); }

namespace detail {
extern const KernelTable kScalarTable;
#if defined(FORGE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(FORGE_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace forge::simd
