// aarch64 only. NEON is architecturally mandatory there, so no runtime probe.
#include "forge/simd/kernels.hpp"

#include <arm_neon.h>

#include <cstdint>

namespace forge::simd {
namespace {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

std::size_t utf8_length_neon(std::string_view text) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  std::size_t count = 0;
  const uint8x16_t mask_c0 = vdupq_n_u8(0xC0);
  const uint8x16_t cont = vdupq_n_u8(0x80);
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t top = vandq_u8(vld1q_u8(p + i), mask_c0);
    // 1 for lead/ASCII bytes, 0 for continuations
    const uint8x16_t lead = vshrq_n_u8(vmvnq_u8(vceqq_u8(top, cont)), 7);
    count += vaddvq_u8(lead);
  }
  for (; i < n; ++i) count += (p[i] & 0xC0u) != 0x80u;
  return count;
}

std::size_t count_word_runs_neon(std::string_view text) {
  // Classification is vectorised; the run-start scan stays scalar over the
  // 16-byte classification vector.
  const auto* p = reinterpret_cast<const std::uint8_t*>(text.data());
  const std::size_t n = text.size();
  std::size_t runs = 0;
  bool prev_space = true;
  std::size_t i = 0;
  const uint8x16_t blank = vdupq_n_u8(' ');
  const uint8x16_t nine = vdupq_n_u8(9);
  const uint8x16_t four = vdupq_n_u8(4);
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t v = vld1q_u8(p + i);
    const uint8x16_t sp = vorrq_u8(vceqq_u8(v, blank), vcleq_u8(vsubq_u8(v, nine), four));
    std::uint8_t lanes[16];
    vst1q_u8(lanes, sp);
    for (int k = 0; k < 16; ++k) {
      const bool space = lanes[k] != 0;
      runs += prev_space && !space;
      prev_space = space;
    }
  }
  for (; i < n; ++i) {
    const bool space = is_space(p[i]);
    runs += prev_space && !space;
    prev_space = space;
  }
  return runs;
}

void find_byte_neon(std::string_view text, char needle, std::vector<std::size_t>& out) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(text.data());
  const std::size_t n = text.size();
  const uint8x16_t target = vdupq_n_u8(static_cast<std::uint8_t>(needle));
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t eq = vceqq_u8(vld1q_u8(p + i), target);
    if (vmaxvq_u8(eq) == 0) continue;
    for (std::size_t k = 0; k < 16; ++k) {
      if (p[i + k] == static_cast<std::uint8_t>(needle)) out.push_back(i + k);
    }
  }
  for (; i < n; ++i) {
    if (p[i] == static_cast<std::uint8_t>(needle)) out.push_back(i);
  }
}

double sum_f64_neon(std::span<const double> values) {
  // Two 2-lane accumulators reproduce the 4-lane interleave of the scalar path.
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  const std::size_t blocks = values.size() / 4;
  const double* p = values.data();
  for (std::size_t b = 0; b < blocks; ++b) {
    acc01 = vaddq_f64(acc01, vld1q_f64(p + 4 * b));
    acc23 = vaddq_f64(acc23, vld1q_f64(p + 4 * b + 2));
  }
  double total = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                 (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
  for (std::size_t i = blocks * 4; i < values.size(); ++i) total += values[i];
  return total;
}

}  // namespace

namespace detail {
const KernelTable kNeonTable{Isa::Neon, utf8_length_neon, count_word_runs_neon, find_byte_neon,
                             sum_f64_neon};
}  // namespace detail

}  // namespace forge::simd
