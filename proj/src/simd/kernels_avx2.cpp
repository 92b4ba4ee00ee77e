// Compiled with -mavx2; only reached after a runtime CPU check.
#include "forge/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cstdint>

namespace forge::simd {
namespace {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

inline __m256i load32(const char* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

std::size_t utf8_length_avx2(std::string_view text) {
  const char* p = text.data();
  const std::size_t n = text.size();
  std::size_t i = 0;
  std::size_t count = 0;
  // Continuation bytes 0x80..0xBF are exactly the signed values -128..-65.
  const __m256i threshold = _mm256_set1_epi8(-65);
  for (; i + 32 <= n; i += 32) {
    const __m256i lead = _mm256_cmpgt_epi8(load32(p + i), threshold);
    count += static_cast<std::size_t>(
        std::popcount(static_cast<std::uint32_t>(_mm256_movemask_epi8(lead))));
  }
  for (; i < n; ++i) count += (static_cast<unsigned char>(p[i]) & 0xC0u) != 0x80u;
  return count;
}

inline std::uint32_t space_mask(__m256i v) {
  // c == ' ' or c in [9, 13]
  const __m256i is_blank = _mm256_cmpeq_epi8(v, _mm256_set1_epi8(' '));
  const __m256i shifted = _mm256_sub_epi8(v, _mm256_set1_epi8(9));
  const __m256i in_range = _mm256_cmpeq_epi8(_mm256_min_epu8(shifted, _mm256_set1_epi8(4)), shifted);
  return static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_or_si256(is_blank, in_range)));
}

std::size_t count_word_runs_avx2(std::string_view text) {
  const char* p = text.data();
  const std::size_t n = text.size();
  std::size_t i = 0;
  std::size_t runs = 0;
  std::uint32_t prev_word = 0;  // 1 when the byte before the block was non-space
  for (; i + 32 <= n; i += 32) {
    const std::uint32_t word = ~space_mask(load32(p + i));
    const std::uint32_t starts = word & ~((word << 1) | prev_word);
    runs += static_cast<std::size_t>(std::popcount(starts));
    prev_word = word >> 31;
  }
  bool prev_space = prev_word == 0;
  for (; i < n; ++i) {
    const bool space = is_space(static_cast<unsigned char>(p[i]));
    runs += prev_space && !space;
    prev_space = space;
  }
  return runs;
}

void find_byte_avx2(std::string_view text, char needle, std::vector<std::size_t>& out) {
  const char* p = text.data();
  const std::size_t n = text.size();
  const __m256i target = _mm256_set1_epi8(needle);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    auto mask = static_cast<std::uint32_t>(
        _mm256_movemask_epi8(_mm256_cmpeq_epi8(load32(p + i), target)));
    while (mask != 0) {
      out.push_back(i + static_cast<std::size_t>(std::countr_zero(mask)));
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i) {
    if (p[i] == needle) out.push_back(i);
  }
}

double sum_f64_avx2(std::span<const double> values) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocks = values.size() / 4;
  const double* p = values.data();
  for (std::size_t b = 0; b < blocks; ++b) acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + 4 * b));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = blocks * 4; i < values.size(); ++i) total += values[i];
  return total;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, utf8_length_avx2, count_word_runs_avx2, find_byte_avx2,
                             sum_f64_avx2};
}  // namespace detail

}  // namespace forge::simd
